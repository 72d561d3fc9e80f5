#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "tacgraph/graph.hpp"

namespace tacgraph {

inline constexpr std::array<int, 5> kGcnWidths{16, 32, 48, 64, 96};
inline constexpr std::array<int, 3> kFcWidths{96, 64, 2};

/// The pooled embedding is standardised before the dense head: with batch statistics while
/// training, with running statistics otherwise. No affine part; the first dense layer has one.
inline constexpr double kPoolNormEps = 1e-5;
inline constexpr double kPoolNormMomentum = 0.1;

template <class S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using RowVector = Eigen::Matrix<S, 1, Eigen::Dynamic>;
template <class S>
using SparseRowMajor = Eigen::SparseMatrix<S, Eigen::RowMajor>;

/// y = x * w + b with x a row (or rows) of activations; w is (in x out).
template <class S>
struct BasicDenseLayer {
  Matrix<S> w;
  RowVector<S> b;
};

template <class S>
struct BasicParameters {
  std::array<BasicDenseLayer<S>, 5> gcn;
  std::array<BasicDenseLayer<S>, 3> fc;
  // Running statistics of the pooled embedding. Not trained, so for_each_tensor skips them.
  RowVector<S> pool_mean = RowVector<S>::Zero(kGcnWidths.back());
  RowVector<S> pool_var = RowVector<S>::Ones(kGcnWidths.back());

  /// Same shapes, all zeros.
  BasicParameters zeros_like() const {
    BasicParameters z;
    for (std::size_t l = 0; l < gcn.size(); ++l) {
      z.gcn[l] = {Matrix<S>::Zero(gcn[l].w.rows(), gcn[l].w.cols()), RowVector<S>::Zero(gcn[l].b.size())};
    }
    for (std::size_t l = 0; l < fc.size(); ++l) {
      z.fc[l] = {Matrix<S>::Zero(fc[l].w.rows(), fc[l].w.cols()), RowVector<S>::Zero(fc[l].b.size())};
    }
    return z;
  }

  template <class T>
  BasicParameters<T> cast() const {
    BasicParameters<T> out;
    for (std::size_t l = 0; l < gcn.size(); ++l) out.gcn[l] = {gcn[l].w.template cast<T>(), gcn[l].b.template cast<T>()};
    for (std::size_t l = 0; l < fc.size(); ++l) out.fc[l] = {fc[l].w.template cast<T>(), fc[l].b.template cast<T>()};
    out.pool_mean = pool_mean.template cast<T>();
    out.pool_var = pool_var.template cast<T>();
    return out;
  }

  BasicParameters& operator+=(const BasicParameters& o) {
    for (std::size_t l = 0; l < gcn.size(); ++l) {
      gcn[l].w += o.gcn[l].w;
      gcn[l].b += o.gcn[l].b;
    }
    for (std::size_t l = 0; l < fc.size(); ++l) {
      fc[l].w += o.fc[l].w;
      fc[l].b += o.fc[l].b;
    }
    return *this;
  }

  BasicParameters& operator*=(S s) {
    for_each_tensor([s](S* d, std::size_t n) {
      for (std::size_t i = 0; i < n; ++i) d[i] *= s;
    });
    return *this;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& l : gcn) n += static_cast<std::size_t>(l.w.size() + l.b.size());
    for (const auto& l : fc) n += static_cast<std::size_t>(l.w.size() + l.b.size());
    return n;
  }

  /// Visits every tensor as (data pointer, element count), GCN layers first, weight then bias.
  template <class F>
  void for_each_tensor(F&& f) {
    for (auto& l : gcn) {
      f(l.w.data(), static_cast<std::size_t>(l.w.size()));
      f(l.b.data(), static_cast<std::size_t>(l.b.size()));
    }
    for (auto& l : fc) {
      f(l.w.data(), static_cast<std::size_t>(l.w.size()));
      f(l.b.data(), static_cast<std::size_t>(l.b.size()));
    }
  }
};

using DenseLayer = BasicDenseLayer<double>;
using Parameters = BasicParameters<double>;

/// Per-feature and per-label standardisation. Identity by default.
struct NormStats {
  Eigen::RowVectorXd feature_mean;
  Eigen::RowVectorXd feature_std;
  Eigen::RowVector2d label_mean = Eigen::RowVector2d::Zero();
  Eigen::RowVector2d label_std = Eigen::RowVector2d::Ones();

  static NormStats identity(int f_in);
};

/// Five GCN layers (16, 32, 48, 64, 96), global mean pooling, FC 96 -> 96 -> 64 -> 2.
struct GcnModel {
  int f_in = 2;
  Parameters params;
  NormStats norm;

  /// Throws ShapeError/NumericalError if shapes or values are off.
  void validate() const;
};

/// Glorot-uniform weights, zero biases, identity normalisation.
GcnModel init_model(int f_in, std::uint64_t seed);

struct PoseEstimate {
  double y = 0.0;      // mm
  double theta = 0.0;  // deg
};

/// D^-1/2 (A + I) D^-1/2 with A the symmetrised adjacency of `edges`.
Eigen::SparseMatrix<double, Eigen::RowMajor> normalized_adjacency(
    int num_nodes, std::span<const DirectedEdge> edges);

/// A graph ready for the network: standardised features plus normalised adjacency.
template <class S>
struct BasicPreparedGraph {
  Matrix<S> features;
  SparseRowMajor<S> adjacency;

  template <class T>
  BasicPreparedGraph<T> cast() const {
    return {features.template cast<T>(), adjacency.template cast<T>()};
  }
};
using PreparedGraph = BasicPreparedGraph<double>;

PreparedGraph prepare(const TactileGraph& graph, const NormStats& norm);

/// Intermediate activations of one forward pass.
template <class S>
struct BasicForwardCache {
  std::array<Matrix<S>, 6> h;   // h[0] input, h[l + 1] = relu(z[l])
  std::array<Matrix<S>, 5> ah;  // adjacency * h[l]
  std::array<Matrix<S>, 5> z;   // pre-activations
  RowVector<S> pooled;
  std::array<RowVector<S>, 3> fc_in;  // fc_in[0] is the standardised pooled vector
  std::array<RowVector<S>, 3> fc_pre;
  RowVector<S> out;             // standardised units, length 2
};
using ForwardCache = BasicForwardCache<double>;

/// Single-graph forward pass in standardised units, using the running pool statistics.
/// Throws NumericalError (with layer index) on NaN/Inf. Instantiated for float and double.
template <class S>
void forward(const BasicParameters<S>& params, const BasicPreparedGraph<S>& graph,
             BasicForwardCache<S>& cache);

/// Adds d(loss)/d(params) for one forward pass, given d(loss)/d(out). Pool statistics are held fixed.
template <class S>
void backward(const BasicParameters<S>& params, const BasicPreparedGraph<S>& graph,
              const BasicForwardCache<S>& cache, const RowVector<S>& d_out, BasicParameters<S>& grad);

/// Pose prediction in physical units. Throws ShapeError if the feature width mismatches.
PoseEstimate gcn_forward(const GcnModel& model, const TactileGraph& graph);

/// Row x column shape of every stage: five GCN outputs, pooled vector, three FC outputs.
std::vector<std::pair<int, int>> layer_shapes(const GcnModel& model, const TactileGraph& graph);

struct Sample {
  TactileGraph graph;
  Eigen::RowVector2d label;  // (y mm, theta deg)
};

struct Dataset {
  std::vector<Sample> samples;
  std::uint64_t split_seed = 0;
  NormStats normalization_stats;

  std::size_t size() const { return samples.size(); }
};

/// Feature statistics over all nodes of all graphs, label statistics over samples.
NormStats compute_norm_stats(std::span<const Sample> samples);

template <class S>
struct BasicPreparedSample {
  BasicPreparedGraph<S> graph;
  RowVector<S> target;  // standardised label, length 2

  template <class T>
  BasicPreparedSample<T> cast() const {
    return {graph.template cast<T>(), target.template cast<T>()};
  }
};
using PreparedSample = BasicPreparedSample<double>;

PreparedSample prepare(const Sample& sample, const NormStats& norm);

struct LossAndGrad {
  double loss = 0.0;
  Parameters grad;
};

/// Mean squared error over the batch and both outputs (standardised labels), with gradients.
/// The pooled embedding is standardised with the statistics of this batch.
LossAndGrad loss_and_grad(const Parameters& params, std::span<const PreparedSample* const> batch);
LossAndGrad loss_and_grad(const GcnModel& model, std::span<const Sample> batch);

/// Loss only.
double batch_loss(const Parameters& params, std::span<const PreparedSample* const> batch);

enum class OptimizerKind { Sgd, Adam };
std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(const std::string& name);

enum class Precision { Float32, Float64 };
std::string to_string(Precision p);
Precision parse_precision(const std::string& name);

/// Constant keeps learning_rate; Cosine anneals it to zero over the run, per batch.
enum class LrSchedule { Constant, Cosine };
std::string to_string(LrSchedule schedule);
LrSchedule parse_lr_schedule(const std::string& name);

struct TrainConfig {
  int epochs = 40;
  int batch_size = 16;
  double learning_rate = 2e-3;
  OptimizerKind optimizer = OptimizerKind::Adam;
  LrSchedule schedule = LrSchedule::Cosine;
  /// Arithmetic used for training passes; parameters and optimiser state stay double.
  Precision precision = Precision::Float32;
  std::uint64_t seed = 0;
  double train_fraction = 0.75;
  /// 0 = take TACGRAPH_THREADS or the hardware concurrency.
  int threads = 0;

  void validate() const;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

/// Random split with round(n * train_fraction) training samples; same seed, same split.
SplitIndices split_indices(std::size_t n, double train_fraction, std::uint64_t seed);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  GcnModel model;  // parameters with the best validation loss
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  SplitIndices split;
};

inline constexpr double kDivergenceLoss = 1e6;

/// Deterministic given config.seed and dataset.split_seed, for any thread count.
/// Throws TrainingError if the loss exceeds kDivergenceLoss or becomes non-finite.
TrainResult train(const Dataset& dataset, const TrainConfig& config);

struct Residual {
  std::size_t index = 0;
  PoseEstimate truth;
  PoseEstimate predicted;
};

struct EvalReport {
  double mae_y = 0.0;      // mm
  double mae_theta = 0.0;  // deg
  std::vector<Residual> residuals;
};

EvalReport evaluate(const GcnModel& model, const Dataset& dataset);
/// Evaluates only the listed samples.
EvalReport evaluate(const GcnModel& model, const Dataset& dataset,
                    std::span<const std::size_t> indices);

}  // namespace tacgraph
