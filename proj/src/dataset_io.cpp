#include "tacgraph/dataset_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <optional>
#include <random>

#include "tacgraph/error.hpp"
#include "tacgraph/image.hpp"
#include "tacgraph/parallel.hpp"

namespace tacgraph {

using nlohmann::json;

namespace {

std::uint64_t splitmix(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double round6(double v) { return std::round(v * 1e6) / 1e6; }

void check_range(const Range& r, const char* name) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
    throw ConfigError(std::string("collection: ") + name + " range must be finite with lo <= hi");
  }
}

void check_inside(const Range& r, double lo, double hi, const char* name) {
  if (r.lo < lo - 1e-12 || r.hi > hi + 1e-12) {
    throw ConfigError(std::string("collection: ") + name + " range [" + std::to_string(r.lo) + ", " +
                      std::to_string(r.hi) + "] leaves the training envelope [" +
                      std::to_string(lo) + ", " + std::to_string(hi) +
                      "]; set allow_out_of_envelope to override");
  }
}

double lerp(const Range& r, double t) { return r.lo + (r.hi - r.lo) * t; }

std::pair<std::size_t, std::size_t> grid_shape(const CollectionSpec& s) {
  if (s.grid_y > 0 && s.grid_theta > 0) return {s.grid_y, s.grid_theta};
  const auto root = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(s.sample_count))));
  return {root, root};
}

double grid_value(const Range& r, std::size_t i, std::size_t n) {
  return n <= 1 ? r.lo : lerp(r, static_cast<double>(i) / static_cast<double>(n - 1));
}

/// Reads a field, turning any JSON type or lookup failure into a ParseError with context.
template <class T>
T field(const json& j, const char* name, const std::string& context) {
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(context + ": field '" + name + "': " + e.what());
  }
}

void check_version(const json& j, const std::string& format, const std::string& context) {
  const auto found_format = field<std::string>(j, "format", context);
  if (found_format != format) {
    throw ParseError(context + ": expected format '" + format + "', found '" + found_format + "'");
  }
  const int v = field<int>(j, "version", context);
  if (v != kFormatVersion) {
    throw VersionError(context + ": format version " + std::to_string(v) + " is not supported (expected " +
                       std::to_string(kFormatVersion) + ")");
  }
}

json row_vector(const Eigen::RowVectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::RowVectorXd row_vector_from(const json& j, const std::string& context) {
  if (!j.is_array()) throw ParseError(context + ": expected an array");
  Eigen::RowVectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError(context + ": element " + std::to_string(i) + " is not a number");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

json matrix(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(row_vector(m.row(r)));
  return rows;
}

Eigen::MatrixXd matrix_from(const json& j, Eigen::Index cols_hint, const std::string& context) {
  if (!j.is_array()) throw ParseError(context + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : cols_hint;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto row = row_vector_from(j[static_cast<std::size_t>(r)], context + " row " + std::to_string(r));
    if (row.size() != cols) throw ParseError(context + ": row " + std::to_string(r) + " has the wrong length");
    m.row(r) = row;
  }
  return m;
}

json norm_to_json(const NormStats& n) {
  return {{"feature_mean", row_vector(n.feature_mean)},
          {"feature_std", row_vector(n.feature_std)},
          {"label_mean", row_vector(n.label_mean)},
          {"label_std", row_vector(n.label_std)}};
}

NormStats norm_from_json(const json& j, const std::string& context) {
  NormStats n;
  try {
    n.feature_mean = row_vector_from(j.at("feature_mean"), context + " feature_mean");
    n.feature_std = row_vector_from(j.at("feature_std"), context + " feature_std");
    const auto lm = row_vector_from(j.at("label_mean"), context + " label_mean");
    const auto ls = row_vector_from(j.at("label_std"), context + " label_std");
    if (lm.size() != 2 || ls.size() != 2) throw ParseError(context + ": label statistics must have 2 entries");
    n.label_mean = lm;
    n.label_std = ls;
  } catch (const json::exception& e) {
    throw ParseError(context + ": " + e.what());
  }
  if (n.feature_mean.size() != n.feature_std.size()) {
    throw ParseError(context + ": feature mean and std lengths differ");
  }
  return n;
}

json layers_to_json(std::span<const DenseLayer> layers) {
  json a = json::array();
  for (const auto& l : layers) a.push_back({{"w", matrix(l.w)}, {"b", row_vector(l.b)}});
  return a;
}

template <std::size_t N>
void layers_from_json(const json& j, std::array<DenseLayer, N>& out, const std::string& context) {
  if (!j.is_array() || j.size() != N) {
    throw ParseError(context + ": expected " + std::to_string(N) + " layers");
  }
  for (std::size_t i = 0; i < N; ++i) {
    const std::string c = context + " layer " + std::to_string(i);
    try {
      out[i].w = matrix_from(j[i].at("w"), 0, c + " w");
      out[i].b = row_vector_from(j[i].at("b"), c + " b");
    } catch (const json::exception& e) {
      throw ParseError(c + ": " + e.what());
    }
  }
}

json pose_to_json(const ContactPose& p) {
  return {{"y_depth", p.y_depth}, {"theta_roll", p.theta_roll}, {"shear_x", p.shear_x}, {"shear_roll", p.shear_roll}};
}

ContactPose pose_from_json(const json& j, const std::string& context) {
  return {field<double>(j, "y_depth", context), field<double>(j, "theta_roll", context),
          field<double>(j, "shear_x", context), field<double>(j, "shear_roll", context)};
}

json points_to_json(std::span<const Vec2> pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back({round6(p.x), round6(p.y)});
  return a;
}

std::vector<Vec2> points_from_json(const json& j, const std::string& context) {
  if (!j.is_array()) throw ParseError(context + ": expected an array of points");
  std::vector<Vec2> pts;
  pts.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& p = j[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ParseError(context + ": point " + std::to_string(i) + " is not [x, y]");
    }
    pts.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return pts;
}

bool same_norm(const NormStats& a, const NormStats& b) {
  return a.feature_mean.size() == b.feature_mean.size() && a.feature_mean == b.feature_mean &&
         a.feature_std == b.feature_std && a.label_mean == b.label_mean && a.label_std == b.label_std;
}

bool same_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

}  // namespace

std::string to_string(Sampling s) { return s == Sampling::Grid ? "grid" : "uniform"; }

Sampling parse_sampling(std::string_view name) {
  std::string n(name);
  for (auto& c : n) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (n == "uniform" || n == "uniform_random" || n == "random") return Sampling::UniformRandom;
  if (n == "grid") return Sampling::Grid;
  throw ConfigError("unknown sampling '" + std::string(name) + "'");
}

void CollectionSpec::validate() const {
  if (sample_count < 1) throw ConfigError("collection: sample_count must be >= 1");
  if (!(pitch > 0.0)) throw ConfigError("collection: pitch must be > 0");
  check_range(y_depth, "y_depth");
  check_range(theta_roll, "theta_roll");
  check_range(shear_x, "shear_x");
  check_range(shear_roll, "shear_roll");
  if (!allow_out_of_envelope) {
    check_inside(y_depth, envelope.nominal_tap - envelope.depth_offset,
                 envelope.nominal_tap + envelope.depth_offset, "y_depth");
    check_inside(theta_roll, -envelope.theta_max, envelope.theta_max, "theta_roll");
    check_inside(shear_x, -envelope.shear_x_max, envelope.shear_x_max, "shear_x");
    check_inside(shear_roll, -envelope.shear_roll_max, envelope.shear_roll_max, "shear_roll");
  }
  if (sampling == Sampling::Grid) {
    if ((grid_y == 0) != (grid_theta == 0)) {
      throw ConfigError("collection: set both grid_y and grid_theta, or neither");
    }
    const auto [gy, gt] = grid_shape(*this);
    if (gy * gt != sample_count) {
      throw ConfigError("collection: grid " + std::to_string(gy) + "x" + std::to_string(gt) +
                        " does not match sample_count " + std::to_string(sample_count));
    }
  }
  if (graph.k < 1) throw ConfigError("collection: k must be >= 1");
  if (!(graph.l_scale > 1.0)) throw ConfigError("collection: l_scale must be > 1");
  if (use_image_path && (image_size < 16 || !(dot_radius > 0.0))) {
    throw ConfigError("collection: image_size must be >= 16 and dot_radius > 0");
  }
  tacgraph::validate(deform, build_layout(layout, pitch, layout_options));
}

ContactPose sample_pose(const CollectionSpec& spec, std::size_t index) {
  std::mt19937_64 rng(splitmix(spec.seed, index));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ContactPose p;
  if (spec.sampling == Sampling::Grid) {
    const auto [gy, gt] = grid_shape(spec);
    p.y_depth = grid_value(spec.y_depth, index / gt, gy);
    p.theta_roll = grid_value(spec.theta_roll, index % gt, gt);
  } else {
    p.y_depth = lerp(spec.y_depth, unit(rng));
    p.theta_roll = lerp(spec.theta_roll, unit(rng));
  }
  p.shear_x = lerp(spec.shear_x, unit(rng));
  p.shear_roll = lerp(spec.shear_roll, unit(rng));
  return p;
}

Dataset generate_dataset(const CollectionSpec& spec, GenerationReport* report) {
  spec.validate();
  const SensorLayout layout = build_layout(spec.layout, spec.pitch, spec.layout_options);
  std::vector<std::optional<Sample>> slots(spec.sample_count);
  parallel_for(spec.sample_count, [&](std::size_t i) {
    const ContactPose pose = sample_pose(spec, i);
    MarkerFrame frame = deform(layout, pose, spec.deform, splitmix(spec.seed ^ 0x5deece66dULL, i));
    if (spec.use_image_path) {
      try {
        frame = frame_via_image(frame, layout, spec.image_size, spec.image_size, spec.dot_radius);
      } catch (const DetectionError&) {
        return;
      }
    }
    slots[i] = Sample{build_graph(frame, spec.graph_kind, spec.graph),
                      Eigen::RowVector2d(pose.y_depth, pose.theta_roll)};
  });
  Dataset d;
  d.split_seed = spec.split_seed;
  d.samples.reserve(slots.size());
  for (auto& s : slots) {
    if (s) d.samples.push_back(std::move(*s));
  }
  if (report) {
    report->requested = spec.sample_count;
    report->skipped = spec.sample_count - d.samples.size();
  }
  if (!d.samples.empty()) d.normalization_stats = compute_norm_stats(d.samples);
  return d;
}

json layout_to_json(const SensorLayout& layout) {
  return {{"kind", to_string(layout.kind)},
          {"pitch", layout.pitch},
          {"rings", layout.rings},
          {"boundary_radius", round6(layout.boundary_radius)},
          {"markers", points_to_json(layout.markers)}};
}

SensorLayout layout_from_json(const json& j) {
  const std::string ctx = "layout";
  SensorLayout l;
  try {
    l.kind = parse_layout_kind(field<std::string>(j, "kind", ctx));
  } catch (const ConfigError& e) {
    throw ParseError(ctx + ": " + e.what());
  }
  l.pitch = field<double>(j, "pitch", ctx);
  l.markers = points_from_json(j.contains("markers") ? j["markers"] : json(), ctx + " markers");
  l.rings = j.contains("rings") ? field<int>(j, "rings", ctx) : 0;
  if (j.contains("boundary_radius")) {
    l.boundary_radius = field<double>(j, "boundary_radius", ctx);
  } else {
    for (const auto& p : l.markers) l.boundary_radius = std::max(l.boundary_radius, norm(p));
    l.boundary_radius += 0.5 * l.pitch;
  }
  return l;
}

json frame_to_json(const MarkerFrame& frame) {
  return {{"positions", points_to_json(frame.positions)},
          {"source_pose", frame.source_pose ? pose_to_json(*frame.source_pose) : json(nullptr)}};
}

MarkerFrame frame_from_json(const json& j) {
  MarkerFrame f;
  f.positions = points_from_json(j.contains("positions") ? j["positions"] : json(), "frame positions");
  if (j.contains("source_pose") && !j["source_pose"].is_null()) {
    f.source_pose = pose_from_json(j["source_pose"], "frame source_pose");
  }
  return f;
}

json graph_to_json(const TactileGraph& g) {
  json edges = json::array();
  for (const auto& [s, d] : g.edge_index) edges.push_back({s, d});
  return {{"kind", to_string(g.kind)},
          {"num_nodes", g.num_nodes()},
          {"node_features", matrix(g.node_features)},
          {"edge_index", std::move(edges)}};
}

TactileGraph graph_from_json(const json& j) {
  const std::string ctx = "graph";
  TactileGraph g;
  try {
    g.kind = parse_graph_kind(field<std::string>(j, "kind", ctx));
  } catch (const ConfigError& e) {
    throw ParseError(ctx + ": " + e.what());
  }
  const int n = field<int>(j, "num_nodes", ctx);
  const Eigen::Index cols = g.kind == GraphKind::Voronoi ? 3 : 2;
  g.node_features = matrix_from(j.contains("node_features") ? j["node_features"] : json(), cols,
                                ctx + " node_features");
  if (g.node_features.rows() != n) throw ParseError(ctx + ": num_nodes does not match node_features");
  const auto edges = field<std::vector<std::array<int, 2>>>(j, "edge_index", ctx);
  g.edge_index.reserve(edges.size());
  for (const auto& e : edges) g.edge_index.emplace_back(e[0], e[1]);
  try {
    g.validate();
  } catch (const Error& e) {
    throw ParseError(ctx + ": " + e.what());
  }
  return g;
}

json model_to_json(const GcnModel& m) {
  return {{"format", "tacgraph-model"},
          {"version", kFormatVersion},
          {"f_in", m.f_in},
          {"gcn", layers_to_json(m.params.gcn)},
          {"fc", layers_to_json(m.params.fc)},
          {"pool_norm", {{"mean", row_vector(m.params.pool_mean)}, {"var", row_vector(m.params.pool_var)}}},
          {"norm_stats", norm_to_json(m.norm)}};
}

GcnModel model_from_json(const json& j) {
  const std::string ctx = "model";
  check_version(j, "tacgraph-model", ctx);
  GcnModel m;
  m.f_in = field<int>(j, "f_in", ctx);
  layers_from_json(j.contains("gcn") ? j["gcn"] : json(), m.params.gcn, ctx + " gcn");
  layers_from_json(j.contains("fc") ? j["fc"] : json(), m.params.fc, ctx + " fc");
  try {
    const json& pn = j.at("pool_norm");
    m.params.pool_mean = row_vector_from(pn.at("mean"), ctx + " pool_norm mean");
    m.params.pool_var = row_vector_from(pn.at("var"), ctx + " pool_norm var");
  } catch (const json::exception& e) {
    throw ParseError(ctx + " pool_norm: " + e.what());
  }
  m.norm = norm_from_json(j.contains("norm_stats") ? j["norm_stats"] : json::object(), ctx + " norm_stats");
  try {
    m.validate();
  } catch (const Error& e) {
    throw ParseError(ctx + ": " + e.what());
  }
  return m;
}

json trajectory_to_json(const Trajectory& t) {
  json steps = json::array();
  for (const auto& s : t.steps) {
    steps.push_back({{"step", s.step},
                     {"x", s.sensor.position.x},
                     {"y", s.sensor.position.y},
                     {"heading", s.sensor.heading},
                     {"estimate", {s.estimate.y, s.estimate.theta}},
                     {"truth", {s.truth.y_depth, s.truth.theta_roll}},
                     {"in_contact", s.in_contact},
                     {"command", {s.command.delta_r, s.command.delta_theta}}});
  }
  json j = {{"format", "tacgraph-trajectory"},
            {"version", kFormatVersion},
            {"contour", t.contour},
            {"estimator", t.estimator},
            {"termination", to_string(t.termination)},
            {"traversed", t.traversed},
            {"perimeter", t.perimeter},
            {"steps", std::move(steps)}};
  if (t.steps.size() >= 3) {
    const Smoothness s = smoothness(t);
    j["smoothness"] = {{"s_turn", s.s_turn}, {"s_slope", s.s_slope}};
  }
  return j;
}

Trajectory trajectory_from_json(const json& j) {
  const std::string ctx = "trajectory";
  check_version(j, "tacgraph-trajectory", ctx);
  Trajectory t;
  t.contour = field<std::string>(j, "contour", ctx);
  t.estimator = field<std::string>(j, "estimator", ctx);
  t.termination = parse_termination(field<std::string>(j, "termination", ctx));
  t.traversed = field<double>(j, "traversed", ctx);
  t.perimeter = field<double>(j, "perimeter", ctx);
  const json& steps = j.contains("steps") ? j["steps"] : json();
  if (!steps.is_array()) throw ParseError(ctx + ": 'steps' must be an array");
  int previous = -1;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string c = ctx + " step " + std::to_string(i);
    const json& s = steps[i];
    TrajectoryStep st;
    st.step = field<int>(s, "step", c);
    if (st.step <= previous) throw ParseError(c + ": step indices must increase");
    previous = st.step;
    st.sensor.position = {field<double>(s, "x", c), field<double>(s, "y", c)};
    st.sensor.heading = field<double>(s, "heading", c);
    const auto est = field<std::array<double, 2>>(s, "estimate", c);
    const auto truth = field<std::array<double, 2>>(s, "truth", c);
    const auto cmd = field<std::array<double, 2>>(s, "command", c);
    st.estimate = {est[0], est[1]};
    st.truth.y_depth = truth[0];
    st.truth.theta_roll = truth[1];
    st.in_contact = field<bool>(s, "in_contact", c);
    st.command = {cmd[0], cmd[1]};
    t.steps.push_back(st);
  }
  return t;
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << j.dump(1) << '\n';
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  const json header = {{"format", "tacgraph-dataset"},
                       {"version", kFormatVersion},
                       {"split_seed", dataset.split_seed},
                       {"count", dataset.size()},
                       {"norm_stats", norm_to_json(dataset.normalization_stats)}};
  out << header.dump() << '\n';
  for (const auto& s : dataset.samples) {
    const json line = {{"graph", graph_to_json(s.graph)}, {"label", {s.label(0), s.label(1)}}};
    out << line.dump() << '\n';
  }
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  auto parse_line = [&](const std::string& text, std::size_t line_no) {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  };
  std::string text;
  if (!std::getline(in, text)) throw ParseError(path.string() + ":1: missing header");
  const json header = parse_line(text, 1);
  const std::string hctx = path.string() + ":1";
  check_version(header, "tacgraph-dataset", hctx);
  Dataset d;
  d.split_seed = field<std::uint64_t>(header, "split_seed", hctx);
  const auto count = field<std::size_t>(header, "count", hctx);
  d.normalization_stats =
      norm_from_json(header.contains("norm_stats") ? header["norm_stats"] : json::object(), hctx + " norm_stats");
  d.samples.reserve(count);
  std::size_t line_no = 1;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) continue;
    const json j = parse_line(text, line_no);
    const std::string ctx = path.string() + ":" + std::to_string(line_no);
    Sample s;
    try {
      s.graph = graph_from_json(j.at("graph"));
    } catch (const json::exception& e) {
      throw ParseError(ctx + ": field 'graph': " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(ctx + ": " + e.what());
    }
    const auto label = field<std::array<double, 2>>(j, "label", ctx);
    s.label = Eigen::RowVector2d(label[0], label[1]);
    if (!d.samples.empty() && (s.graph.kind != d.samples.front().graph.kind ||
                               s.graph.feature_dim() != d.samples.front().graph.feature_dim())) {
      throw ParseError(ctx + ": sample graph kind differs from the first sample");
    }
    d.samples.push_back(std::move(s));
  }
  if (d.samples.size() != count) {
    throw ParseError(path.string() + ": header promises " + std::to_string(count) + " samples, found " +
                     std::to_string(d.samples.size()) + " (truncated file?)");
  }
  return d;
}

void save_model(const GcnModel& model, const std::filesystem::path& path) {
  write_json(model_to_json(model), path);
}

GcnModel load_model(const std::filesystem::path& path) {
  try {
    return model_from_json(read_json(path));
  } catch (const VersionError& e) {
    throw VersionError(path.string() + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_trajectory(const Trajectory& trajectory, const std::filesystem::path& path) {
  write_json(trajectory_to_json(trajectory), path);
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  try {
    return trajectory_from_json(read_json(path));
  } catch (const VersionError& e) {
    throw VersionError(path.string() + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

bool same_dataset(const Dataset& a, const Dataset& b) {
  if (a.split_seed != b.split_seed || a.size() != b.size()) return false;
  if (!same_norm(a.normalization_stats, b.normalization_stats)) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a.samples[i];
    const auto& y = b.samples[i];
    if (x.graph.kind != y.graph.kind || x.graph.edge_index != y.graph.edge_index) return false;
    if (!same_matrix(x.graph.node_features, y.graph.node_features) || x.label != y.label) return false;
  }
  return true;
}

bool same_model(const GcnModel& a, const GcnModel& b) {
  if (a.f_in != b.f_in || !same_norm(a.norm, b.norm)) return false;
  for (std::size_t l = 0; l < a.params.gcn.size(); ++l) {
    if (!same_matrix(a.params.gcn[l].w, b.params.gcn[l].w) || a.params.gcn[l].b != b.params.gcn[l].b) return false;
  }
  for (std::size_t l = 0; l < a.params.fc.size(); ++l) {
    if (!same_matrix(a.params.fc[l].w, b.params.fc[l].w) || a.params.fc[l].b != b.params.fc[l].b) return false;
  }
  return a.params.pool_mean == b.params.pool_mean && a.params.pool_var == b.params.pool_var;
}

}  // namespace tacgraph
