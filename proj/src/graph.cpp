#include "tacgraph/graph.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <mutex>
#include <numeric>
#include <set>

#include "tacgraph/error.hpp"

namespace tacgraph {

namespace {

// Boundary triangles whose exposed edge exceeds this multiple of the median edge are peeled.
constexpr double kPeelFactor = 1.8;

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

struct TimingRegistry {
  std::mutex mutex;
  std::vector<std::shared_ptr<BuildTiming>> per_thread;
};

TimingRegistry& registry() {
  static TimingRegistry r;
  return r;
}

BuildTiming& local_timing() {
  thread_local std::shared_ptr<BuildTiming> local = [] {
    auto t = std::make_shared<BuildTiming>();
    std::lock_guard lock(registry().mutex);
    registry().per_thread.push_back(t);
    return t;
  }();
  return *local;
}

std::vector<double>& timing_slot(BuildTiming& t, GraphKind kind) {
  switch (kind) {
    case GraphKind::Knn: return t.knn_ms;
    case GraphKind::Delaunay: return t.delaunay_ms;
    case GraphKind::Voronoi: return t.voronoi_ms;
  }
  throw ConfigError("unknown graph kind");
}

Eigen::MatrixXd position_features(const MarkerFrame& frame, int cols) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(frame.size()), cols);
  for (std::size_t i = 0; i < frame.size(); ++i) {
    x(i, 0) = frame.positions[i].x;
    x(i, 1) = frame.positions[i].y;
  }
  return x;
}

void require_finite(const MarkerFrame& frame) {
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (!std::isfinite(frame.positions[i].x) || !std::isfinite(frame.positions[i].y)) {
      throw ArgumentError("marker " + std::to_string(i) + " has a non-finite position");
    }
  }
}

double median_edge_length(std::span<const Vec2> pts, const std::vector<geom::Edge>& edges) {
  std::vector<double> len;
  len.reserve(edges.size());
  for (const auto& [a, b] : edges) len.push_back(distance(pts[a], pts[b]));
  auto mid = len.begin() + static_cast<std::ptrdiff_t>(len.size() / 2);
  std::nth_element(len.begin(), mid, len.end());
  return *mid;
}

}  // namespace

std::string to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::Knn: return "knn";
    case GraphKind::Delaunay: return "delaunay";
    case GraphKind::Voronoi: return "voronoi";
  }
  throw ConfigError("unknown graph kind");
}

GraphKind parse_graph_kind(std::string_view name) {
  const std::string n = lower(name);
  if (n == "knn") return GraphKind::Knn;
  if (n == "delaunay") return GraphKind::Delaunay;
  if (n == "voronoi") return GraphKind::Voronoi;
  throw ConfigError("unknown graph kind '" + std::string(name) + "'");
}

void TactileGraph::validate() const {
  const int n = num_nodes();
  const int f = feature_dim();
  if (f != 2 && f != 3) throw ShapeError("graph: feature dimension must be 2 or 3");
  if ((kind == GraphKind::Voronoi) != (f == 3)) {
    throw ShapeError("graph: Voronoi graphs carry 3 features, others 2");
  }
  if (!node_features.allFinite()) throw GeometryError("graph: non-finite node feature");
  for (const auto& [s, d] : edge_index) {
    if (s < 0 || d < 0 || s >= n || d >= n) throw GeometryError("graph: edge references invalid id");
    if (s == d) throw GeometryError("graph: self-loop stored in edge list");
  }
  if (kind != GraphKind::Knn) {
    std::set<DirectedEdge> present(edge_index.begin(), edge_index.end());
    for (const auto& [s, d] : edge_index) {
      if (!present.contains({d, s})) throw GeometryError("graph: edge list is not symmetric");
    }
  }
  if (kind == GraphKind::Voronoi) {
    for (int i = 0; i < n; ++i) {
      if (!(node_features(i, 2) > 0.0)) throw GeometryError("graph: non-positive Voronoi area");
    }
  }
}

TactileGraph knn_graph(const MarkerFrame& frame, int k) {
  const int n = static_cast<int>(frame.size());
  if (k < 1 || k >= n) {
    throw ArgumentError("knn_graph: need 1 <= k < N (k=" + std::to_string(k) +
                        ", N=" + std::to_string(n) + ")");
  }
  require_finite(frame);
  TactileGraph g;
  g.kind = GraphKind::Knn;
  g.node_features = position_features(frame, 2);
  g.edge_index.reserve(static_cast<std::size_t>(n) * k);
  std::vector<std::pair<double, int>> cand(n - 1);
  for (int i = 0; i < n; ++i) {
    int c = 0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      cand[c++] = {squared_norm(frame.positions[i] - frame.positions[j]), j};
    }
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    for (int m = 0; m < k; ++m) g.edge_index.emplace_back(i, cand[m].second);
  }
  return g;
}

std::vector<geom::Edge> delaunay_triangulation(std::span<const Vec2> points) {
  return geom::delaunay(points).edges();
}

std::vector<DirectedEdge> symmetrize(std::span<const geom::Edge> edges) {
  std::vector<DirectedEdge> out;
  out.reserve(2 * edges.size());
  for (const auto& [a, b] : edges) {
    out.emplace_back(a, b);
    out.emplace_back(b, a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> outermost_nodes(std::span<const Vec2> pts, const geom::Triangulation& tri) {
  using geom::Triangulation;
  const std::size_t nt = tri.triangle_count();
  const double limit = kPeelFactor * median_edge_length(pts, tri.edges());

  std::vector<bool> removed(nt, false);
  std::vector<bool> on_boundary(pts.size(), false);
  for (int v : tri.hull) on_boundary[v] = true;

  auto exposed = [&](int e) {
    const int twin = tri.halfedges[e];
    return twin < 0 || removed[twin / 3];
  };

  std::vector<int> queue;
  for (std::size_t e = 0; e < tri.halfedges.size(); ++e) {
    if (tri.halfedges[e] < 0) queue.push_back(static_cast<int>(e));
  }
  while (!queue.empty()) {
    const int e = queue.back();
    queue.pop_back();
    const int t = e / 3;
    if (removed[t] || !exposed(e)) continue;
    const int a = tri.triangles[e];
    const int b = tri.triangles[Triangulation::next(e)];
    const int c = tri.triangles[Triangulation::prev(e)];
    // Keep the boundary a simple cycle: never peel toward a vertex already on it.
    if (on_boundary[c] || distance(pts[a], pts[b]) <= limit) continue;
    removed[t] = true;
    on_boundary[c] = true;
    for (int h : {Triangulation::next(e), Triangulation::prev(e)}) {
      const int twin = tri.halfedges[h];
      if (twin >= 0 && !removed[twin / 3]) queue.push_back(twin);
    }
  }

  std::vector<int> next(pts.size(), -1);
  std::size_t boundary_edges = 0;
  for (std::size_t e = 0; e < tri.halfedges.size(); ++e) {
    if (removed[e / 3] || !exposed(static_cast<int>(e))) continue;
    const int from = tri.triangles[e];
    if (next[from] >= 0) return tri.hull;  // pinched boundary; fall back to the hull
    next[from] = tri.triangles[Triangulation::next(static_cast<int>(e))];
    ++boundary_edges;
  }
  std::vector<int> chain;
  const int start = tri.hull.front();
  int v = start;
  do {
    chain.push_back(v);
    v = next[v];
  } while (v >= 0 && v != start && chain.size() <= boundary_edges);
  if (v != start || chain.size() != boundary_edges) return tri.hull;
  return chain;
}

VoronoiFeatures voronoi_features(const MarkerFrame& frame, double l_scale) {
  if (!(l_scale > 1.0) || !std::isfinite(l_scale)) {
    throw ArgumentError("voronoi_features: l_scale must be > 1");
  }
  require_finite(frame);
  const std::span<const Vec2> pts(frame.positions);
  const int n = static_cast<int>(pts.size());

  VoronoiFeatures out;
  const geom::Triangulation base = geom::delaunay(pts);
  out.delaunay_edges = base.edges();
  out.outermost = outermost_nodes(pts, base);

  Vec2 centroid;
  for (const auto& p : pts) centroid += p;
  centroid *= 1.0 / n;
  out.centroid = centroid;

  std::vector<int> hull = geom::convex_hull(pts);
  std::vector<int> outer_sorted = out.outermost;
  std::sort(hull.begin(), hull.end());
  std::sort(outer_sorted.begin(), outer_sorted.end());
  out.used_virtual_nodes = hull != outer_sorted;

  std::vector<Vec2> outmost;
  outmost.reserve(2 * out.outermost.size());
  for (int v : out.outermost) outmost.push_back(pts[v]);

  if (out.used_virtual_nodes) {
    // Interleave a rotated copy between each pair of consecutive outermost nodes.
    const double half_step = std::numbers::pi / static_cast<double>(out.outermost.size());
    for (int v : out.outermost) out.virtual_nodes.push_back(centroid + rotate(pts[v] - centroid, half_step));

    std::vector<Vec2> augmented(pts.begin(), pts.end());
    augmented.insert(augmented.end(), out.virtual_nodes.begin(), out.virtual_nodes.end());
    for (const auto& e : geom::delaunay(augmented).edges()) {
      if (e.first < n && e.second < n) out.convex_edges.push_back(e);
    }
    outmost.insert(outmost.end(), out.virtual_nodes.begin(), out.virtual_nodes.end());
  } else {
    out.convex_edges = out.delaunay_edges;
  }

  out.bound_nodes.reserve(outmost.size());
  for (const auto& p : outmost) out.bound_nodes.push_back(centroid + (p - centroid) * l_scale);

  std::vector<Vec2> sites(pts.begin(), pts.end());
  sites.insert(sites.end(), out.bound_nodes.begin(), out.bound_nodes.end());
  const geom::Triangulation tri = geom::delaunay(sites);
  const std::vector<int> start_edge = tri.vertex_edges(sites.size());

  std::vector<Vec2> centers(tri.triangle_count());
  for (std::size_t t = 0; t < centers.size(); ++t) {
    const auto [a, b, c] = tri.triangle(t);
    centers[t] = geom::circumcenter(sites[a], sites[b], sites[c]);
  }

  double scale = 0.0;
  for (const auto& p : sites) scale = std::max(scale, std::abs(p.x) + std::abs(p.y));
  const double merge_tol = 1e-12 * std::max(scale, 1.0);

  out.areas.resize(n);
  out.cells.resize(n);
  for (int i = 0; i < n; ++i) {
    VoronoiCell& cell = out.cells[i];
    cell.owner = i;
    const int e0 = start_edge[i];
    int e = e0;
    do {
      if (tri.halfedges[e] < 0) break;
      const Vec2& c = centers[e / 3];
      if (cell.polygon.empty() || distance(cell.polygon.back(), c) > merge_tol) {
        cell.polygon.push_back(c);
      }
      e = tri.halfedges[geom::Triangulation::prev(e)];
    } while (e >= 0 && e != e0);
    if (e != e0 || tri.halfedges[e0] < 0) {
      throw GeometryError("voronoi_features: region of node " + std::to_string(i) +
                          " is unbounded (increase l_scale)");
    }
    if (cell.polygon.size() > 1 && distance(cell.polygon.front(), cell.polygon.back()) <= merge_tol) {
      cell.polygon.pop_back();
    }
    cell.area = geom::signed_area(cell.polygon);
    if (!(cell.area > 0.0) || !std::isfinite(cell.area)) {
      throw GeometryError("voronoi_features: degenerate cell at node " + std::to_string(i));
    }
    out.areas[i] = cell.area;
  }
  return out;
}

TactileGraph build_graph(const MarkerFrame& frame, GraphKind kind, const GraphParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  TactileGraph g;
  switch (kind) {
    case GraphKind::Knn: g = knn_graph(frame, params.k); break;
    case GraphKind::Delaunay: {
      require_finite(frame);
      g.kind = GraphKind::Delaunay;
      g.node_features = position_features(frame, 2);
      const auto edges = delaunay_triangulation(frame.positions);
      g.edge_index = symmetrize(edges);
      break;
    }
    case GraphKind::Voronoi: {
      require_finite(frame);
      g.kind = GraphKind::Voronoi;
      g.node_features = position_features(frame, 3);
      const VoronoiFeatures vf = voronoi_features(frame, params.l_scale);
      g.edge_index = symmetrize(vf.delaunay_edges);
      for (int i = 0; i < g.num_nodes(); ++i) g.node_features(i, 2) = vf.areas[i];
      break;
    }
  }
  const auto t1 = std::chrono::steady_clock::now();
  timing_slot(local_timing(), kind)
      .push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  return g;
}

const std::vector<double>& BuildTiming::of(GraphKind kind) const {
  switch (kind) {
    case GraphKind::Knn: return knn_ms;
    case GraphKind::Delaunay: return delaunay_ms;
    case GraphKind::Voronoi: return voronoi_ms;
  }
  throw ConfigError("unknown graph kind");
}

BuildTiming build_timing_snapshot() {
  BuildTiming merged;
  std::lock_guard lock(registry().mutex);
  for (const auto& t : registry().per_thread) {
    merged.knn_ms.insert(merged.knn_ms.end(), t->knn_ms.begin(), t->knn_ms.end());
    merged.delaunay_ms.insert(merged.delaunay_ms.end(), t->delaunay_ms.begin(), t->delaunay_ms.end());
    merged.voronoi_ms.insert(merged.voronoi_ms.end(), t->voronoi_ms.begin(), t->voronoi_ms.end());
  }
  return merged;
}

void reset_build_timing() {
  std::lock_guard lock(registry().mutex);
  for (auto& t : registry().per_thread) {
    t->knn_ms.clear();
    t->delaunay_ms.clear();
    t->voronoi_ms.clear();
  }
}

}  // namespace tacgraph
