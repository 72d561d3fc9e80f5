#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "tacgraph/vec2.hpp"

namespace tacgraph::geom {

/// Sign of the signed area of (a, b, c): +1 counter-clockwise, -1 clockwise, 0 collinear.
/// Exact for all finite doubles (floating-point filter with rational fallback).
int orient2d(const Vec2& a, const Vec2& b, const Vec2& c);

/// +1 if d lies strictly inside the circle through counter-clockwise (a, b, c),
/// -1 if strictly outside, 0 if cocircular. Exact.
int incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

/// Number of predicate calls that fell through to exact arithmetic (per thread).
std::uint64_t exact_fallback_count();

Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c);

/// Shoelace area; positive for counter-clockwise polygons.
double signed_area(std::span<const Vec2> polygon);

/// Strict convex hull vertices (collinear boundary points excluded), counter-clockwise,
/// starting from the lexicographically smallest point.
std::vector<int> convex_hull(std::span<const Vec2> points);

using Edge = std::pair<int, int>;

/// Half-edge triangle mesh. Triangle t owns half-edges 3t, 3t+1, 3t+2; half-edge e runs
/// from vertex `triangles[e]` to `triangles[next(e)]` and all triangles are counter-clockwise.
/// `halfedges[e]` is the twin half-edge or -1 on the hull.
struct Triangulation {
  std::vector<int> triangles;
  std::vector<int> halfedges;
  /// Hull vertices in counter-clockwise order (includes collinear boundary points).
  std::vector<int> hull;

  static constexpr int next(int e) { return e % 3 == 2 ? e - 2 : e + 1; }
  static constexpr int prev(int e) { return e % 3 == 0 ? e + 2 : e - 1; }

  std::size_t triangle_count() const { return triangles.size() / 3; }
  std::array<int, 3> triangle(std::size_t t) const {
    return {triangles[3 * t], triangles[3 * t + 1], triangles[3 * t + 2]};
  }

  /// Undirected edges (i < j), sorted.
  std::vector<Edge> edges() const;

  /// One outgoing half-edge per vertex; for hull vertices it is the hull edge leaving
  /// the vertex, so a counter-clockwise walk around the vertex ends at the boundary.
  std::vector<int> vertex_edges(std::size_t num_points) const;
};

/// Delaunay triangulation by lexicographic sweep with Lawson flips.
///
/// Cocircular ties are broken toward the diagonal whose sorted index pair is
/// lexicographically smaller, so output is deterministic for degenerate input.
/// Throws GeometryError for fewer than three points, duplicates, or all-collinear input.
Triangulation delaunay(std::span<const Vec2> points);

}  // namespace tacgraph::geom
