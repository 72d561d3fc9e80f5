#include <algorithm>
#include <numeric>

#include "tacgraph/error.hpp"
#include "tacgraph/geometry.hpp"

namespace tacgraph::geom {

std::vector<Edge> Triangulation::edges() const {
  std::vector<Edge> out;
  out.reserve(halfedges.size() / 2 + hull.size());
  for (std::size_t e = 0; e < halfedges.size(); ++e) {
    const int twin = halfedges[e];
    if (twin >= 0 && twin < static_cast<int>(e)) continue;
    const int a = triangles[e];
    const int b = triangles[next(static_cast<int>(e))];
    out.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> Triangulation::vertex_edges(std::size_t num_points) const {
  std::vector<int> out(num_points, -1);
  for (std::size_t e = 0; e < triangles.size(); ++e) {
    const int v = triangles[e];
    if (out[v] < 0 || halfedges[e] < 0) out[v] = static_cast<int>(e);
  }
  return out;
}

namespace {

class SweepBuilder {
 public:
  explicit SweepBuilder(std::span<const Vec2> points)
      : pts_(points),
        hull_next_(points.size(), -1),
        hull_prev_(points.size(), -1),
        hull_edge_(points.size(), -1) {}

  Triangulation build() {
    const int n = static_cast<int>(pts_.size());
    if (n < 3) throw GeometryError("delaunay: need at least 3 points, got " + std::to_string(n));

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) {
      if (pts_[i].x != pts_[j].x) return pts_[i].x < pts_[j].x;
      if (pts_[i].y != pts_[j].y) return pts_[i].y < pts_[j].y;
      return i < j;
    });
    for (int i = 1; i < n; ++i) {
      if (pts_[order[i]] == pts_[order[i - 1]]) {
        throw GeometryError("delaunay: duplicate points " + std::to_string(order[i - 1]) + " and " +
                            std::to_string(order[i]));
      }
    }

    int apex = 2;
    while (apex < n && orient2d(pts_[order[0]], pts_[order[1]], pts_[order[apex]]) == 0) ++apex;
    if (apex == n) throw GeometryError("delaunay: all points are collinear");

    tris_.reserve(6 * n);
    twins_.reserve(6 * n);
    seed_fan(std::span<const int>(order.data(), apex), order[apex]);
    int last = order[apex];
    for (int i = apex + 1; i < n; ++i) {
      insert_outside(order[i], last);
      last = order[i];
    }

    // Final sweep so every interior edge satisfies the tie-breaking rule too.
    for (int e = 0; e < static_cast<int>(twins_.size()); ++e) {
      if (twins_[e] > e) stack_.push_back(e);
    }
    legalize();

    Triangulation out;
    out.triangles = std::move(tris_);
    out.halfedges = std::move(twins_);
    int start = order[0];
    int v = start;
    do {
      out.hull.push_back(v);
      v = hull_next_[v];
    } while (v != start);
    return out;
  }

 private:
  int add_triangle(int a, int b, int c) {
    const int t = static_cast<int>(tris_.size());
    tris_.insert(tris_.end(), {a, b, c});
    twins_.insert(twins_.end(), {-1, -1, -1});
    return t;
  }

  void link(int e, int twin) {
    twins_[e] = twin;
    if (twin >= 0) {
      twins_[twin] = e;
    } else {
      hull_edge_[tris_[e]] = e;
    }
  }

  void seed_fan(std::span<const int> chain, int apex) {
    const bool left = orient2d(pts_[chain[0]], pts_[chain[1]], pts_[apex]) > 0;
    int prev_shared = -1;
    for (std::size_t j = 0; j + 1 < chain.size(); ++j) {
      const int p = chain[j], q = chain[j + 1];
      if (left) {
        // (p, q, apex): shared edge with the next fan triangle is q->apex.
        const int t = add_triangle(p, q, apex);
        link(t, -1);
        if (prev_shared >= 0) link(t + 2, prev_shared); else link(t + 2, -1);
        link(t + 1, -1);
        prev_shared = t + 1;
      } else {
        // (q, p, apex): shared edge with the next fan triangle is apex->q.
        const int t = add_triangle(q, p, apex);
        link(t, -1);
        if (prev_shared >= 0) link(t + 1, prev_shared); else link(t + 1, -1);
        link(t + 2, -1);
        prev_shared = t + 2;
      }
    }
    // Rebuild hull links from boundary half-edges.
    for (int e = 0; e < static_cast<int>(twins_.size()); ++e) {
      if (twins_[e] >= 0) continue;
      const int a = tris_[e], b = tris_[Triangulation::next(e)];
      hull_next_[a] = b;
      hull_prev_[b] = a;
      hull_edge_[a] = e;
    }
  }

  bool visible(int a, int p) const { return orient2d(pts_[a], pts_[hull_next_[a]], pts_[p]) < 0; }

  void insert_outside(int p, int last) {
    int start = -1;
    if (visible(last, p)) {
      start = last;
    } else if (visible(hull_prev_[last], p)) {
      start = hull_prev_[last];
    } else {
      int v = last;
      do {
        if (visible(v, p)) {
          start = v;
          break;
        }
        v = hull_next_[v];
      } while (v != last);
    }
    if (start < 0) {
      throw GeometryError("delaunay: point " + std::to_string(p) + " is not outside the current hull");
    }
    // Extend the visible chain backwards; it is contiguous.
    int first = start;
    while (visible(hull_prev_[first], p) && hull_prev_[first] != start) first = hull_prev_[first];

    int v = first;
    int prev_tri = -1;
    int first_tri = -1;
    do {
      const int w = hull_next_[v];
      const int t = add_triangle(w, v, p);
      link(t, hull_edge_[v]);
      if (prev_tri >= 0) {
        link(t + 1, prev_tri + 2);
      } else {
        first_tri = t;
      }
      prev_tri = t;
      stack_.push_back(t);
      if (v != first) hull_next_[v] = -1;
      v = w;
    } while (visible(v, p) && v != first);

    const int end = v;
    twins_[first_tri + 1] = -1;
    twins_[prev_tri + 2] = -1;
    hull_next_[first] = p;
    hull_prev_[p] = first;
    hull_next_[p] = end;
    hull_prev_[end] = p;
    hull_edge_[first] = first_tri + 1;
    hull_edge_[p] = prev_tri + 2;
    legalize();
  }

  bool should_flip(int a, int b, int c, int d) const {
    const int s = incircle(pts_[a], pts_[b], pts_[c], pts_[d]);
    if (s != 0) return s > 0;
    return std::minmax(c, d) < std::minmax(a, b);
  }

  void legalize() {
    std::size_t guard = 0;
    const std::size_t limit = 200 * pts_.size() * pts_.size() + 1000;
    while (!stack_.empty()) {
      if (++guard > limit) throw GeometryError("delaunay: edge flipping did not converge");
      const int e = stack_.back();
      stack_.pop_back();
      const int f = twins_[e];
      if (f < 0) continue;
      const int a = tris_[e];
      const int b = tris_[Triangulation::next(e)];
      const int c = tris_[Triangulation::prev(e)];
      const int d = tris_[Triangulation::prev(f)];
      if (!should_flip(a, b, c, d)) continue;

      const int t1 = e - e % 3;
      const int t2 = f - f % 3;
      const int out_bc = twins_[Triangulation::next(e)];
      const int out_ca = twins_[Triangulation::prev(e)];
      const int out_ad = twins_[Triangulation::next(f)];
      const int out_db = twins_[Triangulation::prev(f)];

      tris_[t1] = a;
      tris_[t1 + 1] = d;
      tris_[t1 + 2] = c;
      tris_[t2] = c;
      tris_[t2 + 1] = d;
      tris_[t2 + 2] = b;

      link(t1, out_ad);
      link(t1 + 1, t2);
      link(t1 + 2, out_ca);
      link(t2 + 1, out_db);
      link(t2 + 2, out_bc);

      stack_.insert(stack_.end(), {t1, t1 + 2, t2 + 1, t2 + 2});
    }
  }

  std::span<const Vec2> pts_;
  std::vector<int> tris_;
  std::vector<int> twins_;
  std::vector<int> hull_next_;
  std::vector<int> hull_prev_;
  std::vector<int> hull_edge_;
  std::vector<int> stack_;
};

}  // namespace

Triangulation delaunay(std::span<const Vec2> points) { return SweepBuilder(points).build(); }

}  // namespace tacgraph::geom
