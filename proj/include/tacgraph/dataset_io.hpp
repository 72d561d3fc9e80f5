#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "tacgraph/graph.hpp"
#include "tacgraph/nn.hpp"
#include "tacgraph/sensor_sim.hpp"
#include "tacgraph/servo.hpp"

namespace tacgraph {

enum class Sampling { UniformRandom, Grid };
std::string to_string(Sampling s);
Sampling parse_sampling(std::string_view name);

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  friend bool operator==(const Range&, const Range&) = default;
};

/// How a synthetic tap dataset is collected.
struct CollectionSpec {
  LayoutKind layout = LayoutKind::Round331;
  double pitch = 1.0;
  LayoutOptions layout_options;
  std::size_t sample_count = 2000;
  Range y_depth{3.0, 7.0};
  Range theta_roll{-30.0, 30.0};
  Range shear_x{-5.0, 5.0};
  Range shear_roll{-5.0, 5.0};
  Sampling sampling = Sampling::UniformRandom;
  /// Grid resolution along depth and roll; their product must equal sample_count.
  /// Zero means square root of sample_count.
  std::size_t grid_y = 0;
  std::size_t grid_theta = 0;
  std::uint64_t seed = 0;
  std::uint64_t split_seed = 0;
  GraphKind graph_kind = GraphKind::Voronoi;
  GraphParams graph;
  DeformationParams deform;
  PoseEnvelope envelope;
  /// Accept ranges outside the envelope.
  bool allow_out_of_envelope = false;
  /// Route every frame through rasterize and blob detection.
  bool use_image_path = false;
  int image_size = 640;
  double dot_radius = 3.0;  // px

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct GenerationReport {
  std::size_t requested = 0;
  std::size_t skipped = 0;  // samples dropped by blob detection
};

/// The pose drawn for sample i; shear is nuisance and never part of the label.
ContactPose sample_pose(const CollectionSpec& spec, std::size_t index);

/// Generates sample_count labelled graphs in parallel. Sample i depends only on (seed, i).
Dataset generate_dataset(const CollectionSpec& spec, GenerationReport* report = nullptr);

inline constexpr int kFormatVersion = 1;

// JSON conversion. Layout and frame coordinates are rounded to 6 decimals; everything else
// is written with round-trip precision.
nlohmann::json layout_to_json(const SensorLayout& layout);
SensorLayout layout_from_json(const nlohmann::json& j);
nlohmann::json frame_to_json(const MarkerFrame& frame);
MarkerFrame frame_from_json(const nlohmann::json& j);
nlohmann::json graph_to_json(const TactileGraph& graph);
TactileGraph graph_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const GcnModel& model);
GcnModel model_from_json(const nlohmann::json& j);
nlohmann::json trajectory_to_json(const Trajectory& trajectory);
Trajectory trajectory_from_json(const nlohmann::json& j);

/// JSON lines: a header with version, split seed and normalisation statistics, then one
/// {"graph", "label"} object per line.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
/// Throws ParseError with the line number on malformed content, VersionError on a version mismatch.
Dataset load_dataset(const std::filesystem::path& path);

void save_model(const GcnModel& model, const std::filesystem::path& path);
GcnModel load_model(const std::filesystem::path& path);
void save_trajectory(const Trajectory& trajectory, const std::filesystem::path& path);
Trajectory load_trajectory(const std::filesystem::path& path);

/// Pretty-printed JSON to a file, and back. Errors name the path.
void write_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

/// Bitwise equality of every persisted field.
bool same_dataset(const Dataset& a, const Dataset& b);
bool same_model(const GcnModel& a, const GcnModel& b);

}  // namespace tacgraph
