#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/multiprecision/cpp_int.hpp>

#include "tacgraph/geometry.hpp"

namespace tacgraph::geom {

namespace {

using Rational = boost::multiprecision::cpp_rational;

constexpr double kEps = std::numeric_limits<double>::epsilon() / 2.0;
constexpr double kOrientBound = (3.0 + 16.0 * kEps) * kEps;
constexpr double kIncircleBound = (10.0 + 96.0 * kEps) * kEps;

thread_local std::uint64_t g_exact_calls = 0;

int sign_of(const Rational& r) { return r.sign(); }

int orient_exact(const Vec2& a, const Vec2& b, const Vec2& c) {
  ++g_exact_calls;
  const Rational acx = Rational(a.x) - Rational(c.x);
  const Rational bcx = Rational(b.x) - Rational(c.x);
  const Rational acy = Rational(a.y) - Rational(c.y);
  const Rational bcy = Rational(b.y) - Rational(c.y);
  return sign_of(acx * bcy - acy * bcx);
}

int incircle_exact(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  ++g_exact_calls;
  const Rational adx = Rational(a.x) - Rational(d.x);
  const Rational ady = Rational(a.y) - Rational(d.y);
  const Rational bdx = Rational(b.x) - Rational(d.x);
  const Rational bdy = Rational(b.y) - Rational(d.y);
  const Rational cdx = Rational(c.x) - Rational(d.x);
  const Rational cdy = Rational(c.y) - Rational(d.y);
  const Rational alift = adx * adx + ady * ady;
  const Rational blift = bdx * bdx + bdy * bdy;
  const Rational clift = cdx * cdx + cdy * cdy;
  const Rational det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) +
                       clift * (adx * bdy - bdx * ady);
  return sign_of(det);
}

}  // namespace

std::uint64_t exact_fallback_count() { return g_exact_calls; }

int orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double left = (a.x - c.x) * (b.y - c.y);
  const double right = (a.y - c.y) * (b.x - c.x);
  const double det = left - right;
  const double bound = kOrientBound * (std::abs(left) + std::abs(right));
  if (det > bound) return 1;
  if (-det > bound) return -1;
  if (left == 0.0 && right == 0.0) return 0;
  return orient_exact(a, b, c);
}

int incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;

  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;

  const double det =
      alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
  const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                           (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                           (std::abs(adxbdy) + std::abs(bdxady)) * clift;
  const double bound = kIncircleBound * permanent;
  if (det > bound) return 1;
  if (-det > bound) return -1;
  return incircle_exact(a, b, c, d);
}

Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double bx = b.x - a.x, by = b.y - a.y;
  const double cx = c.x - a.x, cy = c.y - a.y;
  const double bl = bx * bx + by * by;
  const double cl = cx * cx + cy * cy;
  const double d = 0.5 / (bx * cy - by * cx);
  return {a.x + (cy * bl - by * cl) * d, a.y + (bx * cl - cx * bl) * d};
}

double signed_area(std::span<const Vec2> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    twice += cross(polygon[i], polygon[(i + 1) % n]);
  }
  return 0.5 * twice;
}

std::vector<int> convex_hull(std::span<const Vec2> points) {
  const int n = static_cast<int>(points.size());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    if (points[i].x != points[j].x) return points[i].x < points[j].x;
    if (points[i].y != points[j].y) return points[i].y < points[j].y;
    return i < j;
  });
  if (n < 3) return order;

  // Andrew's monotone chain; popping on orient <= 0 drops collinear points.
  std::vector<int> hull(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && orient2d(points[hull[k - 2]], points[hull[k - 1]], points[order[i]]) <= 0) --k;
    hull[k++] = order[i];
  }
  for (int i = n - 2, lower = k + 1; i >= 0; --i) {
    while (k >= lower && orient2d(points[hull[k - 2]], points[hull[k - 1]], points[order[i]]) <= 0)
      --k;
    hull[k++] = order[i];
  }
  hull.resize(std::max(k - 1, 0));
  return hull;
}

}  // namespace tacgraph::geom
