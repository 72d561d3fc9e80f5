#include "tacgraph/nn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <type_traits>

#include "tacgraph/error.hpp"
#include "tacgraph/parallel.hpp"

namespace tacgraph {

namespace {

DenseLayer zero_layer(Eigen::Index in, Eigen::Index out) {
  return {Eigen::MatrixXd::Zero(in, out), Eigen::RowVectorXd::Zero(out)};
}

DenseLayer glorot_layer(int in, int out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / (in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  DenseLayer layer = zero_layer(in, out);
  for (Eigen::Index c = 0; c < layer.w.cols(); ++c) {
    for (Eigen::Index r = 0; r < layer.w.rows(); ++r) layer.w(r, c) = dist(rng);
  }
  return layer;
}

template <class S>
Eigen::Array<S, Eigen::Dynamic, Eigen::Dynamic> relu_mask(const Matrix<S>& z) {
  return (z.array() > S(0)).template cast<S>();
}

template <class S>
void check_finite(const Matrix<S>& m, int layer) {
  if (!m.allFinite()) {
    throw NumericalError("non-finite activation in layer " + std::to_string(layer), layer);
  }
}

struct Slice {
  double* data;
  std::size_t size;
};

std::vector<Slice> slices(Parameters& p) {
  std::vector<Slice> out;
  p.for_each_tensor([&](double* d, std::size_t n) { out.push_back({d, n}); });
  return out;
}

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, const Parameters& shape)
      : kind_(kind), m_(shape.zeros_like()), v_(shape.zeros_like()) {}

  void step(Parameters& params, Parameters& grad, double lr) {
    auto p = slices(params);
    auto g = slices(grad);
    if (kind_ == OptimizerKind::Sgd) {
      for (std::size_t s = 0; s < p.size(); ++s) {
        for (std::size_t i = 0; i < p[s].size; ++i) p[s].data[i] -= lr * g[s].data[i];
      }
      return;
    }
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    ++t_;
    const double c1 = 1.0 - std::pow(beta1, t_);
    const double c2 = 1.0 - std::pow(beta2, t_);
    auto m = slices(m_);
    auto v = slices(v_);
    for (std::size_t s = 0; s < p.size(); ++s) {
      for (std::size_t i = 0; i < p[s].size; ++i) {
        const double gi = g[s].data[i];
        m[s].data[i] = beta1 * m[s].data[i] + (1.0 - beta1) * gi;
        v[s].data[i] = beta2 * v[s].data[i] + (1.0 - beta2) * gi * gi;
        const double mhat = m[s].data[i] / c1;
        const double vhat = v[s].data[i] / c2;
        p[s].data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
    }
  }

 private:
  OptimizerKind kind_;
  Parameters m_;
  Parameters v_;
  int t_ = 0;
};

template <class S>
double sample_loss(const BasicParameters<S>& params, const BasicPreparedSample<S>& s,
                   BasicForwardCache<S>& cache) {
  forward(params, s.graph, cache);
  return 0.5 * static_cast<double>((cache.out - s.target).squaredNorm());
}

}  // namespace

NormStats NormStats::identity(int f_in) {
  NormStats s;
  s.feature_mean = Eigen::RowVectorXd::Zero(f_in);
  s.feature_std = Eigen::RowVectorXd::Ones(f_in);
  return s;
}

void GcnModel::validate() const {
  if (f_in != 2 && f_in != 3) throw ShapeError("model: input dimension must be 2 or 3");
  int in = f_in;
  for (std::size_t l = 0; l < params.gcn.size(); ++l) {
    const auto& L = params.gcn[l];
    if (L.w.rows() != in || L.w.cols() != kGcnWidths[l] || L.b.size() != kGcnWidths[l]) {
      throw ShapeError("model: GCN layer " + std::to_string(l) + " has the wrong shape");
    }
    in = kGcnWidths[l];
  }
  for (std::size_t l = 0; l < params.fc.size(); ++l) {
    const auto& L = params.fc[l];
    if (L.w.rows() != in || L.w.cols() != kFcWidths[l] || L.b.size() != kFcWidths[l]) {
      throw ShapeError("model: FC layer " + std::to_string(l) + " has the wrong shape");
    }
    in = kFcWidths[l];
  }
  if (norm.feature_mean.size() != f_in || norm.feature_std.size() != f_in) {
    throw ShapeError("model: normalisation statistics do not match the input dimension");
  }
  if (params.pool_mean.size() != kGcnWidths.back() || params.pool_var.size() != kGcnWidths.back()) {
    throw ShapeError("model: pool statistics have the wrong size");
  }
  if (!params.pool_mean.allFinite() || !params.pool_var.allFinite() || (params.pool_var.array() < 0.0).any()) {
    throw NumericalError("model: invalid pool statistics", static_cast<int>(kGcnWidths.size()));
  }
  int layer = 0;
  for (const auto& L : params.gcn) {
    if (!L.w.allFinite() || !L.b.allFinite()) throw NumericalError("model: non-finite parameter", layer);
    ++layer;
  }
  for (const auto& L : params.fc) {
    if (!L.w.allFinite() || !L.b.allFinite()) throw NumericalError("model: non-finite parameter", layer);
    ++layer;
  }
}

GcnModel init_model(int f_in, std::uint64_t seed) {
  if (f_in != 2 && f_in != 3) throw ShapeError("init_model: input dimension must be 2 or 3");
  std::mt19937_64 rng(seed);
  GcnModel m;
  m.f_in = f_in;
  int in = f_in;
  for (std::size_t l = 0; l < kGcnWidths.size(); ++l) {
    m.params.gcn[l] = glorot_layer(in, kGcnWidths[l], rng);
    in = kGcnWidths[l];
  }
  for (std::size_t l = 0; l < kFcWidths.size(); ++l) {
    m.params.fc[l] = glorot_layer(in, kFcWidths[l], rng);
    in = kFcWidths[l];
  }
  m.norm = NormStats::identity(f_in);
  return m;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> normalized_adjacency(
    int n, std::span<const DirectedEdge> edges) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(2 * edges.size() + n);
  for (const auto& [s, d] : edges) {
    if (s < 0 || d < 0 || s >= n || d >= n) throw ShapeError("adjacency: edge references invalid id");
    if (s == d) continue;
    pairs.emplace_back(s, d);
    pairs.emplace_back(d, s);
  }
  for (int i = 0; i < n; ++i) pairs.emplace_back(i, i);
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  std::vector<double> degree(n, 0.0);
  for (const auto& p : pairs) degree[p.first] += 1.0;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    trips.emplace_back(i, j, 1.0 / std::sqrt(degree[i] * degree[j]));
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

PreparedGraph prepare(const TactileGraph& graph, const NormStats& norm) {
  if (graph.feature_dim() != norm.feature_mean.size()) {
    throw ShapeError("graph has " + std::to_string(graph.feature_dim()) +
                     " features but the model expects " + std::to_string(norm.feature_mean.size()));
  }
  if (graph.num_nodes() < 1) throw ShapeError("graph has no nodes");
  PreparedGraph p;
  p.features = (graph.node_features.rowwise() - norm.feature_mean).array().rowwise() /
               norm.feature_std.array();
  p.adjacency = normalized_adjacency(graph.num_nodes(), graph.edge_index);
  return p;
}

namespace {

template <class S>
RowVector<S> pool_inv_std(const RowVector<S>& var) {
  return (var.array() + S(kPoolNormEps)).rsqrt().matrix();
}

/// GCN stack and mean pooling.
template <class S>
void forward_graph(const BasicParameters<S>& params, const BasicPreparedGraph<S>& graph, BasicForwardCache<S>& c) {
  if (graph.features.cols() != params.gcn[0].w.rows()) {
    throw ShapeError("forward: feature width " + std::to_string(graph.features.cols()) +
                     " does not match model input " + std::to_string(params.gcn[0].w.rows()));
  }
  c.h[0] = graph.features;
  for (int l = 0; l < 5; ++l) {
    c.ah[l] = graph.adjacency * c.h[l];
    c.z[l].noalias() = c.ah[l] * params.gcn[l].w;
    c.z[l].rowwise() += params.gcn[l].b;
    check_finite(c.z[l], l);
    c.h[l + 1] = c.z[l].cwiseMax(S(0));
  }
  c.pooled = c.h[5].colwise().mean();
}

/// Dense head on c.fc_in[0].
template <class S>
void forward_head(const BasicParameters<S>& params, BasicForwardCache<S>& c) {
  for (int j = 0; j < 3; ++j) {
    c.fc_pre[j] = c.fc_in[j] * params.fc[j].w + params.fc[j].b;
    check_finite(Matrix<S>(c.fc_pre[j]), 5 + j);
    if (j < 2) c.fc_in[j + 1] = c.fc_pre[j].cwiseMax(S(0));
  }
  c.out = c.fc_pre[2];
}

/// Accumulates the head gradients and returns d(loss)/d(fc_in[0]).
template <class S>
RowVector<S> backward_head(const BasicParameters<S>& params, const BasicForwardCache<S>& c,
                           const RowVector<S>& d_out, BasicParameters<S>& grad) {
  RowVector<S> d = d_out;
  for (int j = 2; j >= 0; --j) {
    if (j < 2) d = (d.array() * (c.fc_pre[j].array() > S(0)).template cast<S>()).matrix();
    grad.fc[j].w.noalias() += c.fc_in[j].transpose() * d;
    grad.fc[j].b += d;
    d = d * params.fc[j].w.transpose();
  }
  return d;
}

template <class S>
void backward_graph(const BasicParameters<S>& params, const BasicPreparedGraph<S>& graph,
                    const BasicForwardCache<S>& c, const RowVector<S>& d_pooled, BasicParameters<S>& grad) {
  const Eigen::Index n = c.h[5].rows();
  Matrix<S> dh = (d_pooled / static_cast<S>(n)).replicate(n, 1);
  for (int l = 4; l >= 0; --l) {
    const Matrix<S> dz = (dh.array() * relu_mask<S>(c.z[l])).matrix();
    grad.gcn[l].w.noalias() += c.ah[l].transpose() * dz;
    grad.gcn[l].b += dz.colwise().sum();
    // The normalised adjacency is symmetric.
    if (l > 0) dh = graph.adjacency * (dz * params.gcn[l].w.transpose());
  }
}

}  // namespace

template <class S>
void forward(const BasicParameters<S>& params, const BasicPreparedGraph<S>& graph, BasicForwardCache<S>& c) {
  forward_graph(params, graph, c);
  c.fc_in[0] = ((c.pooled - params.pool_mean).array() * pool_inv_std(params.pool_var).array()).matrix();
  forward_head(params, c);
}

template <class S>
void backward(const BasicParameters<S>& params, const BasicPreparedGraph<S>& graph,
              const BasicForwardCache<S>& c, const RowVector<S>& d_out, BasicParameters<S>& grad) {
  const RowVector<S> d = backward_head(params, c, d_out, grad);
  backward_graph(params, graph, c, RowVector<S>((d.array() * pool_inv_std(params.pool_var).array()).matrix()), grad);
}

template void forward<float>(const BasicParameters<float>&, const BasicPreparedGraph<float>&,
                             BasicForwardCache<float>&);
template void forward<double>(const BasicParameters<double>&, const BasicPreparedGraph<double>&,
                              BasicForwardCache<double>&);
template void backward<float>(const BasicParameters<float>&, const BasicPreparedGraph<float>&,
                              const BasicForwardCache<float>&, const RowVector<float>&, BasicParameters<float>&);
template void backward<double>(const BasicParameters<double>&, const BasicPreparedGraph<double>&,
                               const BasicForwardCache<double>&, const RowVector<double>&,
                               BasicParameters<double>&);

namespace {

/// Per-batch scratch, reused across batches.
template <class S>
struct BatchWork {
  std::vector<BasicForwardCache<S>> caches;
  std::vector<BasicParameters<S>> grads;
  std::vector<double> losses;
  Eigen::RowVectorXd mean;  // batch statistics of the pooled embedding
  Eigen::RowVectorXd var;
};

/// Training-mode pass: GCN stacks in parallel, then batch standardisation of the pooled
/// vectors and the dense head in sample order, then the GCN backward passes in parallel.
/// With `grad` set, the mean-loss gradient is reduced into it in sample order, so the result
/// does not depend on the thread count. Returns the mean loss.
template <class S>
double batch_pass(const BasicParameters<S>& params, std::span<const BasicPreparedSample<S>* const> batch,
                  BatchWork<S>& work, Parameters* grad, int threads) {
  const std::size_t count = batch.size();
  if (work.caches.size() < count) work.caches.resize(count);
  if (grad && work.grads.size() < count) work.grads.resize(count, params.zeros_like());
  work.losses.assign(count, 0.0);

  parallel_for(count, [&](std::size_t k) { forward_graph(params, batch[k]->graph, work.caches[k]); }, threads);

  const Eigen::Index width = params.pool_mean.size();
  work.mean = Eigen::RowVectorXd::Zero(width);
  for (std::size_t k = 0; k < count; ++k) work.mean += work.caches[k].pooled.template cast<double>();
  work.mean /= static_cast<double>(count);
  work.var = Eigen::RowVectorXd::Zero(width);
  for (std::size_t k = 0; k < count; ++k) {
    work.var += (work.caches[k].pooled.template cast<double>() - work.mean).array().square().matrix();
  }
  work.var /= static_cast<double>(count);
  const RowVector<S> mean = work.mean.template cast<S>();
  const RowVector<S> inv = pool_inv_std(RowVector<S>(work.var.template cast<S>()));

  const S scale = S(1) / static_cast<S>(count);
  std::vector<RowVector<S>> d_norm(grad ? count : 0);
  for (std::size_t k = 0; k < count; ++k) {
    auto& c = work.caches[k];
    c.fc_in[0] = ((c.pooled - mean).array() * inv.array()).matrix();
    forward_head(params, c);
    const RowVector<S> diff = c.out - batch[k]->target;
    work.losses[k] = 0.5 * static_cast<double>(diff.squaredNorm());
    if (grad) {
      work.grads[k] = params.zeros_like();
      d_norm[k] = backward_head(params, c, RowVector<S>(diff * scale), work.grads[k]);
    }
  }
  double loss = 0.0;
  for (double l : work.losses) loss += l;
  loss /= static_cast<double>(count);
  if (!grad) return loss;

  // Through the batch statistics: d_pooled = inv * (g - mean(g) - x * mean(g * x)).
  RowVector<S> mean_g = RowVector<S>::Zero(width);
  RowVector<S> mean_gx = RowVector<S>::Zero(width);
  for (std::size_t k = 0; k < count; ++k) {
    mean_g += d_norm[k];
    mean_gx += (d_norm[k].array() * work.caches[k].fc_in[0].array()).matrix();
  }
  mean_g *= scale;
  mean_gx *= scale;
  parallel_for(count, [&](std::size_t k) {
    const auto& c = work.caches[k];
    const RowVector<S> d_pooled =
        ((d_norm[k] - mean_g).array() - c.fc_in[0].array() * mean_gx.array()).matrix().cwiseProduct(inv);
    backward_graph(params, batch[k]->graph, c, d_pooled, work.grads[k]);
  }, threads);

  *grad = work.grads[0].template cast<double>();
  for (std::size_t k = 1; k < count; ++k) *grad += work.grads[k].template cast<double>();
  return loss;
}

}  // namespace

PoseEstimate gcn_forward(const GcnModel& model, const TactileGraph& graph) {
  if (graph.feature_dim() != model.f_in) {
    throw ShapeError("gcn_forward: graph has " + std::to_string(graph.feature_dim()) +
                     " features, model expects " + std::to_string(model.f_in));
  }
  ForwardCache cache;
  forward(model.params, prepare(graph, model.norm), cache);
  const Eigen::RowVector2d phys =
      (cache.out.array() * model.norm.label_std.array() + model.norm.label_mean.array()).matrix();
  return {phys(0), phys(1)};
}

std::vector<std::pair<int, int>> layer_shapes(const GcnModel& model, const TactileGraph& graph) {
  ForwardCache c;
  forward(model.params, prepare(graph, model.norm), c);
  std::vector<std::pair<int, int>> shapes;
  for (int l = 1; l <= 5; ++l) shapes.emplace_back(c.h[l].rows(), c.h[l].cols());
  shapes.emplace_back(c.pooled.rows(), c.pooled.cols());
  for (int j = 0; j < 3; ++j) shapes.emplace_back(c.fc_pre[j].rows(), c.fc_pre[j].cols());
  return shapes;
}

NormStats compute_norm_stats(std::span<const Sample> samples) {
  if (samples.empty()) throw ArgumentError("compute_norm_stats: no samples");
  const int f = samples.front().graph.feature_dim();
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(f);
  Eigen::RowVectorXd sq = Eigen::RowVectorXd::Zero(f);
  double rows = 0.0;
  Eigen::RowVector2d lsum = Eigen::RowVector2d::Zero();
  Eigen::RowVector2d lsq = Eigen::RowVector2d::Zero();
  for (const auto& s : samples) {
    if (s.graph.feature_dim() != f) throw ShapeError("compute_norm_stats: mixed feature widths");
    sum += s.graph.node_features.colwise().sum();
    sq += s.graph.node_features.array().square().matrix().colwise().sum();
    rows += static_cast<double>(s.graph.num_nodes());
    lsum += s.label;
    lsq += s.label.array().square().matrix();
  }
  const double n = static_cast<double>(samples.size());
  auto safe_std = [](double var) {
    const double s = std::sqrt(std::max(var, 0.0));
    return s > 1e-12 ? s : 1.0;
  };
  NormStats st;
  st.feature_mean = sum / rows;
  st.feature_std.resize(f);
  for (int j = 0; j < f; ++j) {
    st.feature_std(j) = safe_std(sq(j) / rows - st.feature_mean(j) * st.feature_mean(j));
  }
  st.label_mean = lsum / n;
  for (int j = 0; j < 2; ++j) {
    st.label_std(j) = safe_std(lsq(j) / n - st.label_mean(j) * st.label_mean(j));
  }
  return st;
}

PreparedSample prepare(const Sample& sample, const NormStats& norm) {
  PreparedSample p;
  p.graph = prepare(sample.graph, norm);
  p.target = ((sample.label - norm.label_mean).array() / norm.label_std.array()).matrix();
  return p;
}

LossAndGrad loss_and_grad(const Parameters& params, std::span<const PreparedSample* const> batch) {
  if (batch.empty()) throw ArgumentError("loss_and_grad: empty batch");
  LossAndGrad out;
  BatchWork<double> work;
  out.loss = batch_pass(params, batch, work, &out.grad, 1);
  return out;
}

LossAndGrad loss_and_grad(const GcnModel& model, std::span<const Sample> batch) {
  std::vector<PreparedSample> prepared;
  prepared.reserve(batch.size());
  for (const auto& s : batch) prepared.push_back(prepare(s, model.norm));
  std::vector<const PreparedSample*> ptrs;
  for (const auto& p : prepared) ptrs.push_back(&p);
  return loss_and_grad(model.params, ptrs);
}

double batch_loss(const Parameters& params, std::span<const PreparedSample* const> batch) {
  if (batch.empty()) throw ArgumentError("batch_loss: empty batch");
  BatchWork<double> work;
  return batch_pass(params, batch, work, nullptr, 1);
}

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::Sgd ? "sgd" : "adam"; }

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "adam") return OptimizerKind::Adam;
  throw ConfigError("unknown optimizer '" + name + "'");
}

std::string to_string(Precision p) { return p == Precision::Float32 ? "float32" : "float64"; }

Precision parse_precision(const std::string& name) {
  if (name == "float32" || name == "f32") return Precision::Float32;
  if (name == "float64" || name == "f64") return Precision::Float64;
  throw ConfigError("unknown precision '" + name + "'");
}

std::string to_string(LrSchedule schedule) {
  return schedule == LrSchedule::Cosine ? "cosine" : "constant";
}

LrSchedule parse_lr_schedule(const std::string& name) {
  if (name == "cosine") return LrSchedule::Cosine;
  if (name == "constant") return LrSchedule::Constant;
  throw ConfigError("unknown learning-rate schedule '" + name + "'");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be > 0");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train: train_fraction must lie in (0, 1)");
  }
}

SplitIndices split_indices(std::size_t n, double train_fraction, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  SplitIndices s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(std::min(n_train, n)));
  s.val.assign(idx.begin() + static_cast<std::ptrdiff_t>(std::min(n_train, n)), idx.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  return s;
}

namespace {

[[noreturn]] void diverged(int epoch, const std::string& what, double value) {
  throw TrainingError("training diverged at epoch " + std::to_string(epoch) + " (" + what + " " +
                      std::to_string(value) + "); try a lower learning rate");
}

/// The optimisation loop, with forward/backward passes in precision S.
template <class S>
void run_training(const std::vector<PreparedSample>& prepared_double, const TrainConfig& config,
                  int threads, GcnModel& model, TrainResult& result) {
  std::vector<BasicPreparedSample<S>> prepared;
  if constexpr (std::is_same_v<S, double>) {
    prepared = prepared_double;
  } else {
    prepared.resize(prepared_double.size());
    parallel_for(prepared.size(), [&](std::size_t i) { prepared[i] = prepared_double[i].template cast<S>(); },
                 threads);
  }

  std::vector<std::size_t> order = result.split.train;
  const std::vector<std::size_t>& val = result.split.val.empty() ? result.split.train : result.split.val;

  auto mean_loss = [&](const BasicParameters<S>& p, const std::vector<std::size_t>& idx) {
    std::vector<double> losses(idx.size());
    parallel_for(idx.size(), [&](std::size_t k) {
      BasicForwardCache<S> cache;
      losses[k] = sample_loss(p, prepared[idx[k]], cache);
    }, threads);
    return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(idx.size());
  };

  Optimizer opt(config.optimizer, model.params);
  const std::size_t bs = static_cast<std::size_t>(config.batch_size);
  const std::size_t batches_per_epoch = (order.size() + bs - 1) / bs;
  const double total_steps = static_cast<double>(batches_per_epoch) * config.epochs;
  double step_index = 0.0;
  auto learning_rate = [&] {
    if (config.schedule == LrSchedule::Constant) return config.learning_rate;
    return 0.5 * config.learning_rate * (1.0 + std::cos(std::numbers::pi * step_index / total_steps));
  };
  std::mt19937_64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  BatchWork<S> work;
  std::vector<const BasicPreparedSample<S>*> batch_ptrs;
  double best_val = std::numeric_limits<double>::infinity();
  GcnModel best = model;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t count = std::min(bs, order.size() - start);
      batch_ptrs.clear();
      for (std::size_t k = 0; k < count; ++k) batch_ptrs.push_back(&prepared[order[start + k]]);
      const BasicParameters<S> params = model.params.template cast<S>();
      Parameters grad;
      double batch = 0.0;
      try {
        batch = batch_pass(params, std::span<const BasicPreparedSample<S>* const>(batch_ptrs), work, &grad, threads);
      } catch (const NumericalError& e) {
        diverged(epoch, std::string(e.what()) + ", layer", e.layer());
      }
      if (!std::isfinite(batch) || batch > kDivergenceLoss) diverged(epoch, "batch loss", batch);
      epoch_loss += batch * static_cast<double>(count);
      opt.step(model.params, grad, learning_rate());
      step_index += 1.0;
      // Running pool statistics for inference; a single sample has no spread to learn from.
      if (count > 1) {
        const double unbiased = static_cast<double>(count) / static_cast<double>(count - 1);
        model.params.pool_mean = (1.0 - kPoolNormMomentum) * model.params.pool_mean + kPoolNormMomentum * work.mean;
        model.params.pool_var =
            (1.0 - kPoolNormMomentum) * model.params.pool_var + (kPoolNormMomentum * unbiased) * work.var;
      }
    }
    epoch_loss /= static_cast<double>(order.size());
    double val_loss = 0.0;
    try {
      val_loss = mean_loss(model.params.template cast<S>(), val);
    } catch (const NumericalError& e) {
      diverged(epoch, std::string(e.what()) + ", layer", e.layer());
    }
    if (!std::isfinite(val_loss) || val_loss > kDivergenceLoss) diverged(epoch, "validation loss", val_loss);
    const auto t1 = std::chrono::steady_clock::now();
    result.history.push_back({epoch, epoch_loss, val_loss, std::chrono::duration<double>(t1 - t0).count()});
    if (val_loss < best_val) {
      best_val = val_loss;
      best = model;
      result.best_epoch = epoch;
    }
  }
  model = std::move(best);
}

}  // namespace

TrainResult train(const Dataset& dataset, const TrainConfig& config) {
  config.validate();
  if (dataset.samples.empty()) throw ArgumentError("train: dataset is empty");
  const int f_in = dataset.samples.front().graph.feature_dim();
  for (const auto& s : dataset.samples) {
    if (s.graph.feature_dim() != f_in || s.graph.kind != dataset.samples.front().graph.kind) {
      throw ShapeError("train: samples mix graph kinds or feature widths");
    }
  }
  const int threads = config.threads > 0 ? config.threads : worker_count();

  TrainResult result;
  GcnModel model = init_model(f_in, config.seed);
  model.norm = dataset.normalization_stats.feature_mean.size() == f_in
                   ? dataset.normalization_stats
                   : compute_norm_stats(dataset.samples);

  std::vector<PreparedSample> prepared(dataset.size());
  parallel_for(dataset.size(), [&](std::size_t i) { prepared[i] = prepare(dataset.samples[i], model.norm); },
               threads);

  result.split = split_indices(dataset.size(), config.train_fraction, dataset.split_seed);
  if (result.split.train.empty()) throw ArgumentError("train: split leaves no training samples");

  if (config.precision == Precision::Float32) {
    run_training<float>(prepared, config, threads, model, result);
  } else {
    run_training<double>(prepared, config, threads, model, result);
  }
  result.model = std::move(model);
  return result;
}

EvalReport evaluate(const GcnModel& model, const Dataset& dataset,
                    std::span<const std::size_t> indices) {
  if (indices.empty()) throw ArgumentError("evaluate: no samples");
  EvalReport report;
  report.residuals.resize(indices.size());
  parallel_for(indices.size(), [&](std::size_t k) {
    const Sample& s = dataset.samples.at(indices[k]);
    const PoseEstimate p = gcn_forward(model, s.graph);
    report.residuals[k] = {indices[k], {s.label(0), s.label(1)}, p};
  });
  for (const auto& r : report.residuals) {
    report.mae_y += std::abs(r.predicted.y - r.truth.y);
    report.mae_theta += std::abs(r.predicted.theta - r.truth.theta);
  }
  report.mae_y /= static_cast<double>(indices.size());
  report.mae_theta /= static_cast<double>(indices.size());
  return report;
}

EvalReport evaluate(const GcnModel& model, const Dataset& dataset) {
  std::vector<std::size_t> all(dataset.size());
  std::iota(all.begin(), all.end(), 0);
  return evaluate(model, dataset, all);
}

}  // namespace tacgraph
