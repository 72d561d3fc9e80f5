// Command-line front end: dataset generation, graph building, benchmarks, training,
// evaluation, model comparison, servo runs and SVG plots. Every run writes into --out
// together with manifest.json and the effective config.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tacgraph/config.hpp"
#include "tacgraph/dataset_io.hpp"
#include "tacgraph/error.hpp"
#include "tacgraph/experiment.hpp"
#include "tacgraph/graph.hpp"
#include "tacgraph/image.hpp"
#include "tacgraph/nn.hpp"
#include "tacgraph/parallel.hpp"
#include "tacgraph/sensor_sim.hpp"
#include "tacgraph/servo.hpp"
#include "tacgraph/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tacgraph;

namespace {

constexpr const char* kVersion = "1.0.0";

void log(const std::string& msg) { std::cerr << msg << '\n'; }

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

/// Options shared by every subcommand.
struct Common {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

struct Run {
  std::string command;
  RunConfig config;
  fs::path out;
  json outputs = json::array();

  fs::path file(const std::string& name) {
    outputs.push_back(name);
    return out / name;
  }
};

Run open_run(const std::string& command, const Common& common) {
  Run run;
  run.command = command;
  if (!common.config_path.empty()) run.config = load_config(common.config_path);
  if (common.seed) {
    run.config.collection.seed = *common.seed;
    run.config.collection.split_seed = *common.seed;
    run.config.train.seed = *common.seed;
    run.config.servo.seed = *common.seed;
  }
  if (common.threads) run.config.train.threads = *common.threads;
  run.out = common.out_dir.empty() ? fs::path("run-" + command) : fs::path(common.out_dir);
  fs::create_directories(run.out);
  return run;
}

void close_run(Run& run, const std::vector<std::string>& argv, json extra = json::object()) {
  write_text(run.out / "config.ini", dump_config(run.config));
  json m;
  m["tool"] = "tacgraph";
  m["version"] = kVersion;
  m["command"] = run.command;
  m["argv"] = argv;
  m["config_file"] = "config.ini";
  m["config"] = dump_config(run.config);
  m["seeds"] = {{"collection", run.config.collection.seed},
                {"split", run.config.collection.split_seed},
                {"train", run.config.train.seed},
                {"servo", run.config.servo.seed}};
  m["threads"] = run.config.train.threads > 0 ? run.config.train.threads : worker_count();
  m["outputs"] = run.outputs;
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  m["created"] = stamp;
  for (auto& [k, v] : extra.items()) m[k] = v;
  write_json(m, run.out / "manifest.json");
  log("wrote " + (run.out / "manifest.json").string());
}

GraphKind kind_for_model(const GcnModel& m) { return m.f_in == 3 ? GraphKind::Voronoi : GraphKind::Delaunay; }

void write_history(const TrainResult& r, const fs::path& path) {
  std::ostringstream csv;
  csv << "epoch,train_loss,val_loss,seconds\n";
  char buf[160];
  for (const auto& e : r.history) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.6f\n", e.epoch, e.train_loss, e.val_loss, e.seconds);
    csv << buf;
  }
  write_text(path, csv.str());
}

void write_residuals(const EvalReport& r, const fs::path& path) {
  std::ostringstream csv;
  csv << "index,y_true,theta_true,y_pred,theta_pred\n";
  char buf[200];
  for (const auto& x : r.residuals) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", x.index, x.truth.y, x.truth.theta, x.predicted.y,
                  x.predicted.theta);
    csv << buf;
  }
  write_text(path, csv.str());
}

json eval_json(const EvalReport& r) { return {{"mae_y", r.mae_y}, {"mae_theta", r.mae_theta}, {"count", r.residuals.size()}}; }

json trajectory_summary(const Trajectory& t, const PiGains& gains) {
  json j{{"contour", t.contour},
         {"estimator", t.estimator},
         {"termination", to_string(t.termination)},
         {"steps", t.steps.size()},
         {"traversed_mm", t.traversed},
         {"perimeter_mm", t.perimeter}};
  if (t.steps.size() >= 3) {
    const Smoothness s = smoothness(t);
    j["s_turn_deg_per_mm"] = s.s_turn;
    j["s_slope"] = s.s_slope;
  }
  if (t.steps.size() > 20) {
    const SteadyState ss = steady_state(t, gains.y_ref, gains.theta_ref);
    j["steady_state_depth_error_mm"] = ss.max_depth_error;
    j["steady_state_angle_error_deg"] = ss.max_angle_error;
  }
  return j;
}

MarkerFrame frame_for_pose(const RunConfig& c, const ContactPose& pose) {
  const SensorLayout layout = build_layout(c.collection.layout, c.collection.pitch, c.collection.layout_options);
  return deform(layout, pose, c.collection.deform, c.collection.seed);
}

// ---- subcommands ----

struct GenArgs {
  std::optional<std::size_t> samples;
  std::string kind;
  std::string layout;
  bool image_path = false;
};

void cmd_gen_dataset(const Common& common, const GenArgs& a, const std::vector<std::string>& argv) {
  Run run = open_run("gen-dataset", common);
  auto& spec = run.config.collection;
  if (a.samples) spec.sample_count = *a.samples;
  if (!a.kind.empty()) spec.graph_kind = parse_graph_kind(a.kind);
  if (!a.layout.empty()) spec.layout = parse_layout_kind(a.layout);
  if (a.image_path) spec.use_image_path = true;
  log("generating " + std::to_string(spec.sample_count) + " " + to_string(spec.graph_kind) + " samples on " +
      to_string(spec.layout));
  GenerationReport report;
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset data = generate_dataset(spec, &report);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (report.skipped > 0) log("skipped " + std::to_string(report.skipped) + " samples (blob detection)");
  save_dataset(data, run.file("dataset.jsonl"));
  log("wrote " + std::to_string(data.size()) + " samples in " + fixed(secs, 2) + " s");
  close_run(run, argv, {{"samples", data.size()}, {"skipped", report.skipped}});
}

struct GraphArgs {
  std::string frame;
  std::string kind = "voronoi";
  double depth = 0.0;
  double theta = 0.0;
  double shear_x = 0.0;
  double shear_roll = 0.0;
};

void cmd_build_graph(const Common& common, const GraphArgs& a, const std::vector<std::string>& argv) {
  Run run = open_run("build-graph", common);
  MarkerFrame frame;
  if (!a.frame.empty()) {
    frame = frame_from_json(read_json(a.frame));
  } else {
    frame = frame_for_pose(run.config, {a.depth, a.theta, a.shear_x, a.shear_roll});
    write_json(frame_to_json(frame), run.file("frame.json"));
  }
  const TactileGraph g = build_graph(frame, parse_graph_kind(a.kind), run.config.collection.graph);
  write_json(graph_to_json(g), run.file("graph.json"));
  log(to_string(g.kind) + " graph: " + std::to_string(g.num_nodes()) + " nodes, " +
      std::to_string(g.edge_index.size()) + " directed edges, " + std::to_string(g.feature_dim()) + " features");
  close_run(run, argv, {{"nodes", g.num_nodes()}, {"edges", g.edge_index.size()}});
}

struct BenchArgs {
  std::string layouts = "hexagonal127,round331";
  std::string kinds = "knn,delaunay,voronoi";
  int frames = 100;
};

void cmd_bench(const Common& common, const BenchArgs& a, const std::vector<std::string>& argv) {
  Run run = open_run("bench", common);
  if (a.frames < 1) throw ArgumentError("--frames must be >= 1");
  std::ostringstream csv;
  csv << "layout,kind,nodes,edges,mean_ms,p95_ms\n";
  json rows = json::array();
  for (const auto& layout_name : split_list(a.layouts)) {
    CollectionSpec spec = run.config.collection;
    spec.layout = parse_layout_kind(layout_name);
    const SensorLayout layout = build_layout(spec.layout, spec.pitch, spec.layout_options);
    const MarkerFrame rest = rest_frame(layout);
    std::vector<MarkerFrame> frames;
    for (int i = 0; i < a.frames; ++i) {
      frames.push_back(deform(layout, sample_pose(spec, static_cast<std::size_t>(i)), spec.deform,
                              spec.seed + static_cast<std::uint64_t>(i)));
    }
    for (const auto& kind_name : split_list(a.kinds)) {
      const GraphKind kind = parse_graph_kind(kind_name);
      const TactileGraph g = build_graph(rest, kind, spec.graph);
      std::vector<double> ms;
      for (const auto& f : frames) {
        const auto t0 = std::chrono::steady_clock::now();
        const TactileGraph h = build_graph(f, kind, spec.graph);
        ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
        if (h.num_nodes() != g.num_nodes()) throw GeometryError("bench: node count changed under deformation");
      }
      const double mean = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
      const double p95 = percentile(ms, 0.95);
      csv << to_string(layout.kind) << ',' << to_string(kind) << ',' << g.num_nodes() << ',' << g.edge_index.size()
          << ',' << fixed(mean, 4) << ',' << fixed(p95, 4) << '\n';
      rows.push_back({{"layout", to_string(layout.kind)},
                      {"kind", to_string(kind)},
                      {"nodes", g.num_nodes()},
                      {"edges", g.edge_index.size()},
                      {"mean_ms", mean},
                      {"p95_ms", p95}});
      log(to_string(layout.kind) + " " + to_string(kind) + ": " + std::to_string(g.num_nodes()) + " nodes, " +
          std::to_string(g.edge_index.size()) + " edges, mean " + fixed(mean, 3) + " ms");
    }
  }
  write_text(run.file("bench.csv"), csv.str());
  close_run(run, argv, {{"frames", a.frames}, {"rows", rows}});
}

struct TrainArgs {
  std::string dataset;
  std::optional<int> epochs;
  std::string kind;
};

void cmd_train(const Common& common, const TrainArgs& a, const std::vector<std::string>& argv) {
  Run run = open_run("train", common);
  if (a.epochs) run.config.train.epochs = *a.epochs;
  Dataset data;
  if (!a.dataset.empty()) {
    data = load_dataset(a.dataset);
  } else {
    if (!a.kind.empty()) run.config.collection.graph_kind = parse_graph_kind(a.kind);
    log("no --dataset given; generating " + std::to_string(run.config.collection.sample_count) + " samples");
    data = generate_dataset(run.config.collection);
  }
  log("training on " + std::to_string(data.size()) + " samples for " + std::to_string(run.config.train.epochs) +
      " epochs");
  const TrainResult r = train(data, run.config.train);
  const auto& last = r.history.back();
  log("final train loss " + fixed(last.train_loss, 5) + ", best val loss " +
      fixed(r.history[static_cast<std::size_t>(r.best_epoch)].val_loss, 5) + " at epoch " +
      std::to_string(r.best_epoch));
  save_model(r.model, run.file("model.json"));
  write_history(r, run.file("train_log.csv"));
  const EvalReport val = evaluate(r.model, data, r.split.val);
  write_json(eval_json(val), run.file("validation.json"));
  log("validation mae_y " + fixed(val.mae_y, 4) + " mm, mae_theta " + fixed(val.mae_theta, 3) + " deg");
  close_run(run, argv, {{"dataset", a.dataset}, {"best_epoch", r.best_epoch}, {"validation", eval_json(val)}});
}

struct EvalArgs {
  std::string model;
  std::string dataset;
  std::string split = "all";
};

void cmd_eval(const Common& common, const EvalArgs& a, const std::vector<std::string>& argv) {
  Run run = open_run("eval", common);
  const GcnModel model = load_model(a.model);
  Dataset data;
  if (!a.dataset.empty()) {
    data = load_dataset(a.dataset);
  } else {
    run.config.collection.graph_kind = kind_for_model(model);
    data = generate_dataset(run.config.collection);
  }
  std::vector<std::size_t> idx;
  if (a.split == "all") {
    idx.resize(data.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
  } else if (a.split == "val" || a.split == "train") {
    const SplitIndices s = split_indices(data.size(), run.config.train.train_fraction, data.split_seed);
    idx = a.split == "val" ? s.val : s.train;
  } else {
    throw ArgumentError("--split must be all, train or val");
  }
  const EvalReport r = evaluate(model, data, idx);
  write_json(eval_json(r), run.file("eval.json"));
  write_residuals(r, run.file("residuals.csv"));
  write_text(run.file("residuals.svg"), residual_scatter_svg(r, "residuals: " + fs::path(a.model).filename().string()));
  log("mae_y " + fixed(r.mae_y, 4) + " mm, mae_theta " + fixed(r.mae_theta, 3) + " deg over " +
      std::to_string(r.residuals.size()) + " samples");
  close_run(run, argv, {{"model", a.model}, {"dataset", a.dataset}, {"result", eval_json(r)}});
}

struct CompareArgs {
  int seeds = 3;
  std::optional<std::size_t> samples;
  std::optional<int> epochs;
};

void cmd_compare(const Common& common, const CompareArgs& a, const std::vector<std::string>& argv) {
  Run run = open_run("compare", common);
  if (a.samples) run.config.collection.sample_count = *a.samples;
  if (a.epochs) run.config.train.epochs = *a.epochs;
  const Comparison cmp = compare_models(run.config.collection, run.config.train, a.seeds,
                                        run.config.collection.seed, log);
  std::ostringstream csv;
  csv << "seed,model,mae_y,mae_theta,best_epoch\n";
  json runs = json::array();
  for (const auto& r : cmp.runs) {
    for (const TrainedModel* m : {&r.voronoi, &r.vanilla}) {
      const std::string name = m->kind == GraphKind::Voronoi ? "voronoi" : "vanilla";
      csv << r.seed << ',' << name << ',' << fixed(m->validation.mae_y, 6) << ',' << fixed(m->validation.mae_theta, 6)
          << ',' << m->result.best_epoch << '\n';
      save_model(m->result.model, run.file("model_" + name + "_seed" + std::to_string(r.seed) + ".json"));
      write_history(m->result, run.file("train_log_" + name + "_seed" + std::to_string(r.seed) + ".csv"));
    }
    runs.push_back({{"seed", r.seed},
                    {"voronoi", eval_json(r.voronoi.validation)},
                    {"vanilla", eval_json(r.vanilla.validation)},
                    {"voronoi_wins", r.voronoi_wins()}});
  }
  write_text(run.file("compare.csv"), csv.str());
  const json report{{"runs", runs}, {"voronoi_wins", cmp.voronoi_wins()}, {"seeds", a.seeds}};
  write_json(report, run.file("compare.json"));
  log("Voronoi mae_y <= vanilla mae_y in " + std::to_string(cmp.voronoi_wins()) + " of " + std::to_string(a.seeds) +
      " seeds");
  close_run(run, argv, {{"result", report}});
}

struct ServoArgs {
  std::string contour;
  std::string estimator = "oracle";
  std::string model;
  double noise = 0.0;
  std::optional<int> max_steps;
};

void cmd_servo(const Common& common, const ServoArgs& a, const std::vector<std::string>& argv) {
  Run run = open_run("servo", common);
  if (!a.contour.empty()) run.config.contour = parse_contour_kind(a.contour);
  if (a.max_steps) run.config.servo.max_steps = *a.max_steps;
  Estimator est;
  if (a.estimator == "oracle") {
    est = oracle_estimator(a.noise, run.config.servo.seed);
  } else if (a.estimator == "model") {
    if (a.model.empty()) throw ArgumentError("--estimator model needs --model PATH");
    est = model_estimator(load_model(a.model));
  } else {
    throw ArgumentError("--estimator must be oracle or model");
  }
  const Contour contour(run.config.contour, run.config.contour_params);
  const Trajectory t = run_servo(contour, est, run.config.servo);
  save_trajectory(t, run.file("trajectory.json"));
  const json summary = trajectory_summary(t, run.config.servo.gains);
  write_json(summary, run.file("summary.json"));
  write_text(run.file("trajectory.svg"), trajectory_svg(contour, std::span<const Trajectory>(&t, 1)));
  log(t.estimator + " on " + t.contour + ": " + to_string(t.termination) + " after " + std::to_string(t.steps.size()) +
      " steps");
  close_run(run, argv, {{"result", summary}});
}

struct PlotArgs {
  std::string what = "heatmap";
  double depth = 5.0;
  double theta = 0.0;
  std::vector<std::string> trajectories;
  std::string residuals;
};

void cmd_plot(const Common& common, const PlotArgs& a, const std::vector<std::string>& argv) {
  Run run = open_run("plot", common);
  if (a.what == "heatmap") {
    const MarkerFrame frame = frame_for_pose(run.config, {a.depth, a.theta, 0.0, 0.0});
    const VoronoiFeatures vf = voronoi_features(frame, run.config.collection.graph.l_scale);
    write_text(run.file("heatmap.svg"), voronoi_heatmap_svg(frame, vf));
  } else if (a.what == "trajectory") {
    if (a.trajectories.empty()) throw ArgumentError("plot trajectory needs at least one --trajectory FILE");
    std::vector<Trajectory> ts;
    for (const auto& p : a.trajectories) ts.push_back(load_trajectory(p));
    const Contour contour(parse_contour_kind(ts.front().contour), run.config.contour_params);
    write_text(run.file("trajectory.svg"), trajectory_svg(contour, ts));
  } else if (a.what == "residuals") {
    if (a.residuals.empty()) throw ArgumentError("plot residuals needs --residuals FILE (residuals.csv)");
    std::ifstream in(a.residuals);
    if (!in) throw Error("cannot open '" + a.residuals + "'");
    EvalReport r;
    std::string line;
    std::getline(in, line);
    int line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      Residual x;
      if (std::sscanf(line.c_str(), "%zu,%lf,%lf,%lf,%lf", &x.index, &x.truth.y, &x.truth.theta, &x.predicted.y,
                      &x.predicted.theta) != 5) {
        throw ParseError(a.residuals + ":" + std::to_string(line_no) + ": expected 5 comma-separated values");
      }
      r.mae_y += std::abs(x.truth.y - x.predicted.y);
      r.mae_theta += std::abs(x.truth.theta - x.predicted.theta);
      r.residuals.push_back(x);
    }
    if (!r.residuals.empty()) {
      r.mae_y /= static_cast<double>(r.residuals.size());
      r.mae_theta /= static_cast<double>(r.residuals.size());
    }
    write_text(run.file("residuals.svg"), residual_scatter_svg(r, fs::path(a.residuals).filename().string()));
  } else {
    throw ArgumentError("plot: unknown kind '" + a.what + "' (heatmap, trajectory, residuals)");
  }
  close_run(run, argv);
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  CLI::App app{"Tactile graph workbench: synthetic taps, Voronoi graphs, GCN pose regression, contour servoing"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "INI config file");
    sub->add_option("--out", common.out_dir, "Run directory (default run-<command>)");
    sub->add_option("--seed", common.seed, "Seed for taps, split, weights and servo noise");
    sub->add_option("--threads", common.threads, "Worker threads (default TACGRAPH_THREADS or all cores)");
  };

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-dataset", "Generate a labelled tap dataset (JSON lines)");
  add_common(gen_cmd);
  gen_cmd->add_option("--samples", gen.samples, "Number of taps");
  gen_cmd->add_option("--kind", gen.kind, "Graph kind: knn, delaunay, voronoi");
  gen_cmd->add_option("--layout", gen.layout, "hexagonal127 or round331");
  gen_cmd->add_flag("--image-path", gen.image_path, "Route frames through rasterize and blob detection");

  GraphArgs graph;
  auto* graph_cmd = app.add_subcommand("build-graph", "Build one tactile graph from a frame file or a pose");
  add_common(graph_cmd);
  graph_cmd->add_option("--frame", graph.frame, "Frame JSON; otherwise the pose flags are used");
  graph_cmd->add_option("--kind", graph.kind, "knn, delaunay or voronoi");
  graph_cmd->add_option("--depth", graph.depth, "Indentation depth (mm)");
  graph_cmd->add_option("--theta", graph.theta, "Roll (deg)");
  graph_cmd->add_option("--shear-x", graph.shear_x, "Shear along x (mm)");
  graph_cmd->add_option("--shear-roll", graph.shear_roll, "Shear roll (deg)");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Graph sizes and build latency per layout and kind");
  add_common(bench_cmd);
  bench_cmd->add_option("--layout", bench.layouts, "Comma-separated layouts");
  bench_cmd->add_option("--kinds", bench.kinds, "Comma-separated graph kinds");
  bench_cmd->add_option("--frames", bench.frames, "Deformed frames timed per row");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a GCN pose regressor");
  add_common(train_cmd);
  train_cmd->add_option("--dataset", tr.dataset, "Dataset JSONL (generated from the config if omitted)");
  train_cmd->add_option("--epochs", tr.epochs, "Epochs");
  train_cmd->add_option("--kind", tr.kind, "Graph kind when generating");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Mean absolute error of a model on a dataset");
  add_common(eval_cmd);
  eval_cmd->add_option("--model", ev.model, "Model JSON")->required();
  eval_cmd->add_option("--dataset", ev.dataset, "Dataset JSONL (generated from the config if omitted)");
  eval_cmd->add_option("--split", ev.split, "all, train or val");

  CompareArgs cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Voronoi-feature model against the vanilla model over seeds");
  add_common(cmp_cmd);
  cmp_cmd->add_option("--seeds", cmp.seeds, "Number of seeds")->check(CLI::PositiveNumber);
  cmp_cmd->add_option("--samples", cmp.samples, "Taps per dataset");
  cmp_cmd->add_option("--epochs", cmp.epochs, "Epochs per model");

  ServoArgs sv;
  auto* servo_cmd = app.add_subcommand("servo", "Closed-loop contour following");
  add_common(servo_cmd);
  servo_cmd->add_option("--contour", sv.contour,
                        "circle, textured_circle, square, beveled_prism, compliant_circle");
  servo_cmd->add_option("--estimator", sv.estimator, "oracle or model");
  servo_cmd->add_option("--model", sv.model, "Model JSON for --estimator model");
  servo_cmd->add_option("--noise", sv.noise, "Oracle depth noise std (mm)");
  servo_cmd->add_option("--max-steps", sv.max_steps, "Step limit");

  PlotArgs pl;
  auto* plot_cmd = app.add_subcommand("plot", "SVG plots: area heat map, trajectories, residuals");
  add_common(plot_cmd);
  plot_cmd->add_option("what", pl.what, "heatmap, trajectory or residuals");
  plot_cmd->add_option("--depth", pl.depth, "Heat map depth (mm)");
  plot_cmd->add_option("--theta", pl.theta, "Heat map roll (deg)");
  plot_cmd->add_option("--trajectory", pl.trajectories, "Trajectory JSON (repeatable)");
  plot_cmd->add_option("--residuals", pl.residuals, "residuals.csv from eval");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen_cmd) cmd_gen_dataset(common, gen, args);
    else if (*graph_cmd) cmd_build_graph(common, graph, args);
    else if (*bench_cmd) cmd_bench(common, bench, args);
    else if (*train_cmd) cmd_train(common, tr, args);
    else if (*eval_cmd) cmd_eval(common, ev, args);
    else if (*cmp_cmd) cmd_compare(common, cmp, args);
    else if (*servo_cmd) cmd_servo(common, sv, args);
    else if (*plot_cmd) cmd_plot(common, pl, args);
  } catch (const TrainingError& e) {
    log(std::string("training failed: ") + e.what());
    return 2;
  } catch (const ConfigError& e) {
    log(std::string("config error: ") + e.what());
    return 2;
  } catch (const Error& e) {
    log(std::string("error: ") + e.what());
    return 2;
  } catch (const std::exception& e) {
    log(std::string("unexpected failure: ") + e.what());
    return 2;
  }
  return 0;
}
