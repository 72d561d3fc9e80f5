#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "tacgraph/geometry.hpp"
#include "tacgraph/sensor_sim.hpp"

namespace tacgraph {

enum class GraphKind { Knn, Delaunay, Voronoi };

std::string to_string(GraphKind kind);
GraphKind parse_graph_kind(std::string_view name);

using DirectedEdge = std::pair<int, int>;

/// Node features are (x, y) in mm, plus the Voronoi cell area in mm^2 for Voronoi graphs.
/// Edges are directed; self-loops are never stored.
struct TactileGraph {
  Eigen::MatrixXd node_features;
  std::vector<DirectedEdge> edge_index;
  GraphKind kind = GraphKind::Knn;

  int num_nodes() const { return static_cast<int>(node_features.rows()); }
  int feature_dim() const { return static_cast<int>(node_features.cols()); }

  /// Throws ShapeError/GeometryError describing the first violated invariant.
  void validate() const;
};

/// Each node points at its k nearest neighbours (Euclidean, ties to the lower id).
TactileGraph knn_graph(const MarkerFrame& frame, int k);

/// Undirected Delaunay edges (i < j).
std::vector<geom::Edge> delaunay_triangulation(std::span<const Vec2> points);

/// Both directions of every undirected edge, sorted.
std::vector<DirectedEdge> symmetrize(std::span<const geom::Edge> edges);

struct VoronoiCell {
  int owner = -1;
  std::vector<Vec2> polygon;  // counter-clockwise
  double area = 0.0;
};

struct VoronoiFeatures {
  std::vector<double> areas;
  std::vector<VoronoiCell> cells;
  /// Delaunay edges of the pins themselves.
  std::vector<geom::Edge> delaunay_edges;
  /// Outermost nodes (boundary of the pin cloud), counter-clockwise.
  std::vector<int> outermost;
  /// True when the outermost nodes were not all strict convex-hull vertices.
  bool used_virtual_nodes = false;
  std::vector<Vec2> virtual_nodes;
  /// Edges among original nodes of the triangulation augmented with virtual nodes.
  std::vector<geom::Edge> convex_edges;
  /// Enlarged boundary used to close the outer cells.
  std::vector<Vec2> bound_nodes;
  Vec2 centroid;
};

inline constexpr double kDefaultBoundaryScale = 1.3;

/// Voronoi cell areas of every pin, closed by an enlarged boundary ring.
/// Throws ArgumentError for l_scale <= 1 and GeometryError if a pin's region stays unbounded.
VoronoiFeatures voronoi_features(const MarkerFrame& frame, double l_scale = kDefaultBoundaryScale);

/// Nodes on the outer boundary of the pin cloud: the Delaunay hull with long boundary
/// triangles peeled away, so pins that sit inside the hull along a straight or concave
/// side are still reported. Counter-clockwise.
std::vector<int> outermost_nodes(std::span<const Vec2> points, const geom::Triangulation& tri);

struct GraphParams {
  int k = 6;
  double l_scale = kDefaultBoundaryScale;
};

/// Knn -> (x, y) with kNN edges; Delaunay -> (x, y) with Delaunay edges;
/// Voronoi -> (x, y, area) with Delaunay edges. Wall-clock time is recorded per call.
TactileGraph build_graph(const MarkerFrame& frame, GraphKind kind, const GraphParams& params = {});

struct BuildTiming {
  std::vector<double> knn_ms;
  std::vector<double> delaunay_ms;
  std::vector<double> voronoi_ms;

  const std::vector<double>& of(GraphKind kind) const;
};

/// Merges every thread's recorded build_graph timings.
BuildTiming build_timing_snapshot();
void reset_build_timing();

}  // namespace tacgraph
