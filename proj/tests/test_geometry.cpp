#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "tacgraph/error.hpp"
#include "tacgraph/geometry.hpp"
#include "tacgraph/graph.hpp"

using namespace tacgraph;

TEST_CASE("orientation and incircle signs") {
  CHECK(geom::orient2d({0, 0}, {1, 0}, {0, 1}) == 1);
  CHECK(geom::orient2d({0, 0}, {0, 1}, {1, 0}) == -1);
  CHECK(geom::orient2d({0, 0}, {1, 1}, {3, 3}) == 0);
  // Exactly collinear, away from the origin.
  CHECK(geom::orient2d({0.5, 0.5}, {12, 12}, {24, 24}) == 0);
  CHECK(geom::incircle({0, 0}, {1, 0}, {0, 1}, {0.5, 0.5}) == 1);
  CHECK(geom::incircle({0, 0}, {1, 0}, {0, 1}, {2, 2}) == -1);
  CHECK(geom::incircle({0, 0}, {1, 0}, {0, 1}, {1, 1}) == 0);
}

TEST_CASE("shoelace and circumcentre") {
  const std::vector<Vec2> sq{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  CHECK(geom::signed_area(sq) == doctest::Approx(4.0));
  std::vector<Vec2> cw(sq.rbegin(), sq.rend());
  CHECK(geom::signed_area(cw) == doctest::Approx(-4.0));
  const Vec2 c = geom::circumcenter({0, 0}, {2, 0}, {0, 2});
  CHECK(c.x == doctest::Approx(1.0));
  CHECK(c.y == doctest::Approx(1.0));
}

TEST_CASE("strict hull drops collinear points") {
  const std::vector<Vec2> pts{{0, 0}, {1, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 1}};
  const auto hull = geom::convex_hull(pts);
  CHECK(hull == std::vector<int>{0, 2, 3, 4});
}

TEST_CASE("delaunay degeneracies") {
  CHECK_THROWS_AS(geom::delaunay(std::vector<Vec2>{{0, 0}, {1, 1}, {2, 2}, {3, 3}}), GeometryError);
  CHECK_THROWS_AS(geom::delaunay(std::vector<Vec2>{{0, 0}, {1, 1}}), GeometryError);
  CHECK_THROWS_AS(geom::delaunay(std::vector<Vec2>{{0, 0}, {1, 0}, {0, 1}, {1, 0}}), GeometryError);
  // Cocircular square: the tie goes to the diagonal with the smaller index pair.
  const auto edges = delaunay_triangulation(std::vector<Vec2>{{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const std::set<geom::Edge> e(edges.begin(), edges.end());
  CHECK(e.count({0, 2}) == 1);
  CHECK(e.count({1, 3}) == 0);
  CHECK(e.size() == 5);
}

TEST_CASE("empty circumcircle on random point sets") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Vec2> pts(30);
    for (auto& p : pts) p = {u(rng), u(rng)};
    const geom::Triangulation tri = geom::delaunay(pts);
    const std::size_t n = pts.size();
    CHECK(tri.edges().size() <= 3 * n - 6);
    for (std::size_t t = 0; t < tri.triangle_count(); ++t) {
      const auto [a, b, c] = tri.triangle(t);
      REQUIRE(geom::orient2d(pts[a], pts[b], pts[c]) > 0);
      const Vec2 o = geom::circumcenter(pts[a], pts[b], pts[c]);
      const double r = distance(o, pts[a]);
      for (std::size_t k = 0; k < n; ++k) {
        if (static_cast<int>(k) == a || static_cast<int>(k) == b || static_cast<int>(k) == c) continue;
        CHECK(distance(o, pts[k]) >= r - 1e-9);
      }
    }
    // Euler: a triangulation of n points with h hull vertices has 2n - 2 - h triangles.
    CHECK(tri.triangle_count() == 2 * n - 2 - tri.hull.size());
  }
}

TEST_CASE("grid points triangulate deterministically") {
  std::vector<Vec2> pts;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) pts.push_back({static_cast<double>(i), static_cast<double>(j)});
  }
  const auto a = delaunay_triangulation(pts);
  const auto b = delaunay_triangulation(pts);
  CHECK(a == b);
  CHECK(a.size() == 3 * 36 - 3 - 20);
}
