#pragma once

#include <filesystem>
#include <string>

#include "tacgraph/dataset_io.hpp"
#include "tacgraph/graph.hpp"
#include "tacgraph/nn.hpp"
#include "tacgraph/servo.hpp"

namespace tacgraph {

/// Everything a CLI run can be configured with. Defaults match the library defaults.
struct RunConfig {
  CollectionSpec collection;  // [sensor]; collection.graph and graph_kind come from [graph]
  TrainConfig train;          // [train]
  ServoConfig servo;          // [servo]; layout, deformation and graph mirror [sensor]/[graph]
  ContourKind contour = ContourKind::Circle;
  ContourParams contour_params;
};

/// Parses INI-style text: `[section]` headers, `key = value` lines, `#` or `;` comments.
/// Unknown sections or keys and malformed values raise ConfigError naming source:line.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Complete key = value rendering; parse_config(dump_config(c)) reproduces c.
std::string dump_config(const RunConfig& config);

}  // namespace tacgraph
