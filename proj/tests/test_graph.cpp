#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <set>

#include "tacgraph/error.hpp"
#include "tacgraph/geometry.hpp"
#include "tacgraph/graph.hpp"
#include "tacgraph/sensor_sim.hpp"

using namespace tacgraph;

namespace {

MarkerFrame rest(LayoutKind kind) { return rest_frame(build_layout(kind, 1.0)); }

bool within_pct(std::size_t value, double target, double pct) {
  return std::abs(static_cast<double>(value) - target) <= target * pct / 100.0;
}

}  // namespace

TEST_CASE("knn edge counts and tie breaking") {
  CHECK(knn_graph(rest(LayoutKind::Hexagonal127), 6).edge_index.size() == 762);
  CHECK(knn_graph(rest(LayoutKind::Round331), 6).edge_index.size() == 1986);

  // Node 0 is equidistant from 1, 2, 3, 4; ties go to the lower ids.
  MarkerFrame f;
  f.positions = {{0, 0}, {1, 0}, {0, 1}, {-1, 0}, {0, -1}, {5, 5}};
  const TactileGraph g = knn_graph(f, 2);
  CHECK(g.edge_index.size() == 12);
  CHECK(g.edge_index[0] == DirectedEdge{0, 1});
  CHECK(g.edge_index[1] == DirectedEdge{0, 2});
  CHECK(g.feature_dim() == 2);
  CHECK_THROWS_AS(knn_graph(f, 6), ArgumentError);
  CHECK_THROWS_AS(knn_graph(f, 0), ArgumentError);
}

TEST_CASE("delaunay edge counts on the standard layouts") {
  const std::size_t hex = 2 * delaunay_triangulation(rest(LayoutKind::Hexagonal127).positions).size();
  const std::size_t round = 2 * delaunay_triangulation(rest(LayoutKind::Round331).positions).size();
  CHECK(within_pct(hex, 744, 2.0));
  CHECK(within_pct(round, 1860, 2.0));
  CHECK(hex / 2 <= 3 * 127 - 6);
  CHECK(round / 2 <= 3 * 331 - 6);
}

TEST_CASE("planarity holds on deformed frames") {
  const SensorLayout l = build_layout(LayoutKind::Round331, 1.0);
  const DeformationParams p;
  for (int i = 0; i < 20; ++i) {
    const MarkerFrame f = deform(l, {3.0 + 0.2 * i, -30.0 + 3.0 * i, 0.5 * (i % 5) - 1.0, 1.0}, p, i);
    CHECK(delaunay_triangulation(f.positions).size() <= 3 * l.size() - 6);
  }
}

TEST_CASE("build_graph feature widths and edges") {
  const MarkerFrame f = rest(LayoutKind::Round331);
  const TactileGraph k = build_graph(f, GraphKind::Knn);
  const TactileGraph d = build_graph(f, GraphKind::Delaunay);
  const TactileGraph v = build_graph(f, GraphKind::Voronoi);
  CHECK(k.feature_dim() == 2);
  CHECK(k.edge_index.size() == 331 * 6);
  CHECK(d.feature_dim() == 2);
  CHECK(v.num_nodes() == 331);
  CHECK(v.feature_dim() == 3);
  CHECK(v.edge_index == d.edge_index);
  CHECK(v.node_features.leftCols(2) == d.node_features);
  for (const auto& e : v.edge_index) {
    CHECK(std::binary_search(v.edge_index.begin(), v.edge_index.end(), DirectedEdge{e.second, e.first}));
    CHECK(e.first != e.second);
  }
  CHECK_NOTHROW(v.validate());
}

TEST_CASE("voronoi cells are convex, positive and match the shoelace area") {
  for (LayoutKind kind : {LayoutKind::Hexagonal127, LayoutKind::Round331}) {
    const SensorLayout l = build_layout(kind, 1.0);
    for (int i = 0; i < 5; ++i) {
      const MarkerFrame f = i == 0 ? rest_frame(l) : deform(l, {3.0 + i, 25.0 - 12.0 * i, 4.0 - 2.0 * i, 3.0}, {}, i);
      const VoronoiFeatures vf = voronoi_features(f);
      REQUIRE(vf.areas.size() == l.size());
      for (std::size_t c = 0; c < vf.cells.size(); ++c) {
        const auto& cell = vf.cells[c];
        CHECK(cell.owner == static_cast<int>(c));
        CHECK(std::isfinite(cell.area));
        CHECK(cell.area > 0.0);
        CHECK(vf.areas[c] == cell.area);
        CHECK(std::abs(geom::signed_area(cell.polygon) - cell.area) <= 1e-9 * cell.area);
        const std::size_t m = cell.polygon.size();
        REQUIRE(m >= 3);
        for (std::size_t j = 0; j < m; ++j) {
          const double turn = cross(cell.polygon[(j + 1) % m] - cell.polygon[j],
                                    cell.polygon[(j + 2) % m] - cell.polygon[(j + 1) % m]);
          CHECK(turn >= -1e-9);
        }
      }
    }
  }
}

TEST_CASE("virtual nodes only where the outer ring is not strictly convex") {
  const VoronoiFeatures hex = voronoi_features(rest(LayoutKind::Hexagonal127));
  CHECK(hex.used_virtual_nodes);
  CHECK(hex.outermost.size() == 36);
  CHECK(hex.virtual_nodes.size() == hex.outermost.size());
  const VoronoiFeatures round = voronoi_features(rest(LayoutKind::Round331));
  CHECK_FALSE(round.used_virtual_nodes);
  CHECK(round.outermost.size() == 60);
  CHECK(round.bound_nodes.size() == round.outermost.size());
  // Bound nodes sit at l_scale times the outermost radius.
  for (std::size_t i = 0; i < round.bound_nodes.size(); ++i) {
    CHECK(distance(round.bound_nodes[i], round.centroid) ==
          doctest::Approx(kDefaultBoundaryScale * norm(rest(LayoutKind::Round331).positions[round.outermost[i]] -
                                                       round.centroid)));
  }
}

TEST_CASE("interior cells tile their union") {
  for (LayoutKind kind : {LayoutKind::Hexagonal127, LayoutKind::Round331}) {
    const MarkerFrame f = rest(kind);
    const VoronoiFeatures vf = voronoi_features(f);
    const int n = static_cast<int>(f.size());
    std::vector<std::vector<int>> adj(n);
    for (const auto& [a, b] : vf.delaunay_edges) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    std::vector<int> depth(n, -1);
    std::queue<int> q;
    for (int v : vf.outermost) {
      depth[v] = 0;
      q.push(v);
    }
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int w : adj[v]) {
        if (depth[w] < 0) {
          depth[w] = depth[v] + 1;
          q.push(w);
        }
      }
    }
    // Boundary edges of the union: cell edges without an opposite twin in another interior cell.
    auto key = [](const Vec2& p) { return std::make_pair(std::llround(p.x * 1e7), std::llround(p.y * 1e7)); };
    using Key = std::pair<long long, long long>;
    std::map<std::pair<Key, Key>, int> count;
    std::map<Key, Vec2> where;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      if (depth[i] < 2) continue;
      sum += vf.areas[i];
      const auto& poly = vf.cells[i].polygon;
      for (std::size_t j = 0; j < poly.size(); ++j) {
        const Key a = key(poly[j]), b = key(poly[(j + 1) % poly.size()]);
        if (a == b) continue;
        where[a] = poly[j];
        auto twin = count.find({b, a});
        if (twin != count.end()) {
          if (--twin->second == 0) count.erase(twin);
        } else {
          ++count[{a, b}];
        }
      }
    }
    std::map<Key, Key> next;
    for (const auto& [e, c] : count) {
      REQUIRE(c == 1);
      REQUIRE(next.count(e.first) == 0);
      next[e.first] = e.second;
    }
    REQUIRE(!next.empty());
    // The leftover edges form one closed loop around the interior region.
    std::vector<Vec2> loop;
    Key at = next.begin()->first;
    for (std::size_t steps = 0; steps <= next.size(); ++steps) {
      loop.push_back(where.at(at));
      at = next.at(at);
      if (at == next.begin()->first) break;
    }
    CHECK(loop.size() == next.size());
    const double tiled = geom::signed_area(loop);
    CHECK(std::abs(tiled - sum) <= 1e-6 * sum);
  }
}

TEST_CASE("cell area grows with depth near the contact") {
  const SensorLayout l = build_layout(LayoutKind::Round331, 1.0);
  DeformationParams p;
  p.noise_std = 0.0;
  double previous = 0.0;
  for (double y = 0.0; y <= 5.0 + 1e-9; y += 0.25) {
    const MarkerFrame f = deform(l, {y, 0.0, 0.0, 0.0}, p, 0);
    const VoronoiFeatures vf = voronoi_features(f);
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (norm(l.markers[i]) <= p.contact_sigma) {
        sum += vf.areas[i];
        ++count;
      }
    }
    const double mean = sum / count;
    CHECK(mean >= previous);
    previous = mean;
  }
}

TEST_CASE("voronoi errors") {
  CHECK_THROWS_AS(voronoi_features(rest(LayoutKind::Round331), 1.0), ArgumentError);
  CHECK_THROWS_AS(voronoi_features(rest(LayoutKind::Round331), 0.5), ArgumentError);
  MarkerFrame line;
  line.positions = {{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  CHECK_THROWS_AS(build_graph(line, GraphKind::Delaunay), GeometryError);
}

TEST_CASE("build timing is recorded per call") {
  reset_build_timing();
  const MarkerFrame f = rest(LayoutKind::Hexagonal127);
  build_graph(f, GraphKind::Voronoi);
  build_graph(f, GraphKind::Voronoi);
  build_graph(f, GraphKind::Knn);
  const BuildTiming t = build_timing_snapshot();
  CHECK(t.voronoi_ms.size() == 2);
  CHECK(t.knn_ms.size() == 1);
  CHECK(t.delaunay_ms.empty());
  CHECK(t.voronoi_ms[0] > 0.0);
}

TEST_CASE("graph kind names") {
  CHECK(parse_graph_kind("voronoi") == GraphKind::Voronoi);
  CHECK(parse_graph_kind("Delaunay") == GraphKind::Delaunay);
  CHECK(parse_graph_kind("knn") == GraphKind::Knn);
  CHECK_THROWS_AS(parse_graph_kind("mesh"), ConfigError);
  for (GraphKind k : {GraphKind::Knn, GraphKind::Delaunay, GraphKind::Voronoi}) CHECK(parse_graph_kind(to_string(k)) == k);
}
