#include "tacgraph/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "tacgraph/error.hpp"

namespace tacgraph {

int Comparison::voronoi_wins() const {
  return static_cast<int>(std::count_if(runs.begin(), runs.end(), [](const SeedComparison& r) { return r.voronoi_wins(); }));
}

TrainedModel train_and_score(const CollectionSpec& spec, GraphKind kind, const TrainConfig& config,
                             const LogFn& log) {
  CollectionSpec s = spec;
  s.graph_kind = kind;
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset data = generate_dataset(s);
  TrainedModel out;
  out.kind = kind;
  out.result = train(data, config);
  out.validation = evaluate(out.result.model, data, out.result.split.val);
  if (log) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%s: mae_y %.4f mm, mae_theta %.3f deg (best epoch %d, %.1f s)",
                  to_string(kind).c_str(), out.validation.mae_y, out.validation.mae_theta, out.result.best_epoch,
                  std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    log(buf);
  }
  return out;
}

Comparison compare_models(CollectionSpec spec, TrainConfig config, int seeds, std::uint64_t base_seed,
                          const LogFn& log) {
  if (seeds < 1) throw ArgumentError("compare_models: need at least one seed");
  Comparison cmp;
  for (int i = 0; i < seeds; ++i) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
    spec.seed = seed;
    spec.split_seed = seed;
    config.seed = seed;
    if (log) log("seed " + std::to_string(seed));
    SeedComparison run;
    run.seed = seed;
    run.voronoi = train_and_score(spec, GraphKind::Voronoi, config, log);
    run.vanilla = train_and_score(spec, GraphKind::Delaunay, config, log);
    cmp.runs.push_back(std::move(run));
  }
  return cmp;
}

}  // namespace tacgraph
