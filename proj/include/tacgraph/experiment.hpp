#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tacgraph/dataset_io.hpp"
#include "tacgraph/nn.hpp"

namespace tacgraph {

/// One trained model and its score on the held-out split.
struct TrainedModel {
  GraphKind kind = GraphKind::Voronoi;
  TrainResult result;
  EvalReport validation;
};

/// Voronoi-feature model against the vanilla (x, y) model on the same taps.
struct SeedComparison {
  std::uint64_t seed = 0;
  TrainedModel voronoi;
  TrainedModel vanilla;

  bool voronoi_wins() const { return voronoi.validation.mae_y <= vanilla.validation.mae_y; }
};

struct Comparison {
  std::vector<SeedComparison> runs;

  int voronoi_wins() const;
};

using LogFn = std::function<void(const std::string&)>;

/// Generates the dataset of `spec` with graphs of `kind`, trains on the split and scores
/// on the held-out samples.
TrainedModel train_and_score(const CollectionSpec& spec, GraphKind kind, const TrainConfig& config,
                             const LogFn& log = {});

/// For each of `seeds` runs (seed = base_seed + i, used for taps, split and weights), trains
/// a Voronoi model and a vanilla Delaunay model on identical taps.
Comparison compare_models(CollectionSpec spec, TrainConfig config, int seeds, std::uint64_t base_seed,
                          const LogFn& log = {});

}  // namespace tacgraph
