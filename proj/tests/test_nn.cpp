#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tacgraph/dataset_io.hpp"
#include "tacgraph/error.hpp"
#include "tacgraph/graph.hpp"
#include "tacgraph/nn.hpp"
#include "test_util.hpp"

using namespace tacgraph;

namespace {

TactileGraph random_graph(int n, int f, std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  TactileGraph g;
  g.kind = f == 3 ? GraphKind::Voronoi : GraphKind::Delaunay;
  g.node_features = Eigen::MatrixXd::NullaryExpr(n, f, [&] { return N(rng); });
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int i = 0; i < 2 * n; ++i) {
    const int a = pick(rng), b = pick(rng);
    if (a == b) continue;
    g.edge_index.push_back({a, b});
    g.edge_index.push_back({b, a});
  }
  return g;
}

TactileGraph permuted(const TactileGraph& g, const std::vector<int>& perm) {
  // perm[old] = new
  TactileGraph p = g;
  for (int i = 0; i < g.num_nodes(); ++i) p.node_features.row(perm[i]) = g.node_features.row(i);
  for (auto& [a, b] : p.edge_index) {
    a = perm[a];
    b = perm[b];
  }
  return p;
}

void perturb(GcnModel& m, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, scale);
  m.params.for_each_tensor([&](double* d, std::size_t k) {
    for (std::size_t i = 0; i < k; ++i) d[i] += N(rng);
  });
}

/// Small labelled set on a 37-pin hexagonal sensor.
Dataset small_dataset(std::size_t n, GraphKind kind, std::uint64_t seed) {
  CollectionSpec spec;
  spec.layout = LayoutKind::Hexagonal127;
  spec.layout_options.rings = 3;
  spec.sample_count = n;
  spec.graph_kind = kind;
  spec.seed = seed;
  spec.split_seed = seed;
  return generate_dataset(spec);
}

}  // namespace

TEST_CASE("layer shapes") {
  const GcnModel m = init_model(3, 1);
  std::mt19937_64 rng(1);
  for (int n : {1, 7, 40}) {
    const auto shapes = layer_shapes(m, random_graph(n, 3, rng));
    const std::vector<std::pair<int, int>> expected{{n, 16}, {n, 32}, {n, 48}, {n, 64}, {n, 96},
                                                    {1, 96}, {1, 96}, {1, 64}, {1, 2}};
    CHECK(shapes == expected);
  }
  CHECK(m.params.gcn[0].w.rows() == 3);
  CHECK(m.params.fc[0].w.rows() == 96);
  CHECK(m.params.fc[2].w.cols() == 2);
}

TEST_CASE("single node with zero weights returns the last bias") {
  GcnModel m = init_model(2, 5);
  m.params *= 0.0;
  m.params.fc[2].b << 0.25, -1.5;
  TactileGraph g;
  g.node_features = Eigen::MatrixXd::Constant(1, 2, 3.0);
  const PoseEstimate p = gcn_forward(m, g);
  CHECK(p.y == 0.25);
  CHECK(p.theta == -1.5);
}

TEST_CASE("toy graph matches the scripted evaluation") {
  const auto golden = test::load_data("toy_gcn.json");
  GcnModel m = init_model(2, 0);
  auto set = [](DenseLayer& layer, int index) {
    for (Eigen::Index i = 0; i < layer.w.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.w.cols(); ++j) {
        layer.w(i, j) = 3.0 * std::sin(12.9898 * static_cast<double>(i + 1) + 78.233 * static_cast<double>(j + 1) +
                                       37.719 * index) /
                        std::sqrt(static_cast<double>(layer.w.rows()));
      }
    }
    for (Eigen::Index j = 0; j < layer.b.size(); ++j) layer.b(j) = 0.05 * std::cos(static_cast<double>(j + index));
  };
  for (int l = 0; l < 5; ++l) set(m.params.gcn[l], l);
  for (int l = 0; l < 3; ++l) set(m.params.fc[l], 5 + l);
  for (Eigen::Index j = 0; j < 96; ++j) {
    m.params.pool_mean(j) = 0.5 * std::sin(static_cast<double>(j));
    m.params.pool_var(j) = 1.0 + 0.5 * std::cos(2.0 * static_cast<double>(j));
  }
  TactileGraph g;
  const auto& feats = golden["features"];
  g.node_features.resize(static_cast<Eigen::Index>(feats.size()), 2);
  for (std::size_t i = 0; i < feats.size(); ++i) {
    g.node_features(static_cast<Eigen::Index>(i), 0) = feats[i][0];
    g.node_features(static_cast<Eigen::Index>(i), 1) = feats[i][1];
  }
  for (const auto& e : golden["edges"]) g.edge_index.push_back({e[0].get<int>(), e[1].get<int>()});
  const PoseEstimate p = gcn_forward(m, g);
  CHECK(p.y == doctest::Approx(golden["output"][0].get<double>()).epsilon(1e-10));
  CHECK(p.theta == doctest::Approx(golden["output"][1].get<double>()).epsilon(1e-10));
}

TEST_CASE("normalised adjacency") {
  const std::vector<DirectedEdge> edges{{0, 1}, {1, 0}, {1, 2}, {1, 2}};
  const auto A = normalized_adjacency(4, edges);
  const Eigen::MatrixXd d(A);
  CHECK(d.isApprox(d.transpose()));
  // Degrees with self-loops: 2, 3, 2, 1.
  CHECK(d(0, 0) == doctest::Approx(0.5));
  CHECK(d(0, 1) == doctest::Approx(1.0 / std::sqrt(6.0)));
  CHECK(d(1, 2) == doctest::Approx(1.0 / std::sqrt(6.0)));
  CHECK(d(3, 3) == doctest::Approx(1.0));
  CHECK(d(0, 2) == 0.0);
  CHECK_THROWS_AS(normalized_adjacency(2, std::vector<DirectedEdge>{{0, 2}}), ShapeError);
}

TEST_CASE("permutation invariance") {
  std::mt19937_64 rng(77);
  GcnModel m = init_model(3, 2);
  perturb(m, 0.05, 3);
  for (int trial = 0; trial < 10; ++trial) {
    const TactileGraph g = random_graph(5 + trial * 3, 3, rng);
    std::vector<int> perm(static_cast<std::size_t>(g.num_nodes()));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const PoseEstimate a = gcn_forward(m, g);
    const PoseEstimate b = gcn_forward(m, permuted(g, perm));
    CHECK(std::abs(a.y - b.y) < 1e-9);
    CHECK(std::abs(a.theta - b.theta) < 1e-9);
  }
}

TEST_CASE("isolated nodes stay finite") {
  TactileGraph g;
  g.node_features = Eigen::MatrixXd::Random(4, 2);
  g.edge_index = {{0, 1}, {1, 0}};
  const PoseEstimate p = gcn_forward(init_model(2, 4), g);
  CHECK(std::isfinite(p.y));
  CHECK(std::isfinite(p.theta));
}

TEST_CASE("forward errors") {
  TactileGraph g;
  g.node_features = Eigen::MatrixXd::Zero(3, 3);
  CHECK_THROWS_AS(gcn_forward(init_model(2, 0), g), ShapeError);
  g.node_features(1, 1) = NAN;
  try {
    gcn_forward(init_model(3, 0), g);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(e.layer() == 0);
  }
}

TEST_CASE("gradients match central differences") {
  std::mt19937_64 rng(11);
  GcnModel m = init_model(3, 8);
  perturb(m, 0.05, 9);
  std::vector<Sample> batch;
  for (int i = 0; i < 3; ++i) batch.push_back({random_graph(6 + i, 3, rng), Eigen::RowVector2d(0.3 * i, -0.4)});
  const LossAndGrad lg = loss_and_grad(m, batch);
  std::vector<PreparedSample> prepared;
  for (const auto& s : batch) prepared.push_back(prepare(s, m.norm));
  std::vector<const PreparedSample*> ptrs;
  for (const auto& p : prepared) ptrs.push_back(&p);

  std::vector<std::pair<double*, std::size_t>> params, grads;
  m.params.for_each_tensor([&](double* d, std::size_t k) { params.push_back({d, k}); });
  Parameters g = lg.grad;
  g.for_each_tensor([&](double* d, std::size_t k) { grads.push_back({d, k}); });
  REQUIRE(params.size() == 16);
  for (std::size_t t = 0; t < params.size(); ++t) {
    double worst = 0.0;
    // Every entry of the small tensors, a stride through the large ones.
    const std::size_t stride = std::max<std::size_t>(1, params[t].second / 60);
    for (std::size_t i = 0; i < params[t].second; i += stride) {
      double* x = params[t].first + i;
      const double saved = *x;
      const double an = grads[t].first[i];
      // A ReLU kink inside the larger step spoils that difference; the smaller one sees past it.
      double rel = 1e300;
      for (double h : {1e-5, 1e-6}) {
        *x = saved + h;
        const double up = batch_loss(m.params, ptrs);
        *x = saved - h;
        const double down = batch_loss(m.params, ptrs);
        *x = saved;
        const double fd = (up - down) / (2 * h);
        rel = std::min(rel, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6}));
      }
      worst = std::max(worst, rel);
    }
    CHECK_MESSAGE(worst < 1e-4, "tensor " << t);
  }
}

TEST_CASE("zero-error batch has zero loss and gradient") {
  std::mt19937_64 rng(5);
  GcnModel m = init_model(2, 3);
  for (auto& L : m.params.fc) {
    for (Eigen::Index j = 0; j < L.b.size(); ++j) L.b(j) = 0.1 * std::cos(static_cast<double>(j));
  }
  const TactileGraph g = random_graph(9, 2, rng);
  // A batch of one standardises its pooled vector to zero. A model with a silent GCN stack and
  // zero pool mean feeds the same zero vector to the head at inference.
  GcnModel silent = m;
  for (auto& L : silent.params.gcn) {
    L.w.setZero();
    L.b.setZero();
  }
  const PoseEstimate p = gcn_forward(silent, g);
  const std::vector<Sample> batch{{g, Eigen::RowVector2d(p.y, p.theta)}};
  const LossAndGrad lg = loss_and_grad(m, batch);
  CHECK(lg.loss == 0.0);
  Parameters grad = lg.grad;
  grad.for_each_tensor([](double* d, std::size_t k) {
    for (std::size_t i = 0; i < k; ++i) CHECK(d[i] == 0.0);
  });
}

TEST_CASE("duplicated sample does not change the mean loss") {
  std::mt19937_64 rng(6);
  const GcnModel m = init_model(3, 3);
  const Sample s{random_graph(7, 3, rng), Eigen::RowVector2d(1.0, -2.0)};
  const double once = loss_and_grad(m, std::vector<Sample>{s}).loss;
  const double twice = loss_and_grad(m, std::vector<Sample>{s, s}).loss;
  CHECK(once == doctest::Approx(twice).epsilon(1e-15));
  CHECK_THROWS_AS(loss_and_grad(m, std::vector<Sample>{}), ArgumentError);
}

TEST_CASE("float and double passes agree") {
  std::mt19937_64 rng(12);
  GcnModel m = init_model(3, 1);
  const PreparedSample s = prepare(Sample{random_graph(20, 3, rng), Eigen::RowVector2d(0.5, 0.2)}, m.norm);
  ForwardCache cd;
  forward(m.params, s.graph, cd);
  BasicForwardCache<float> cf;
  const auto pf = m.params.cast<float>();
  forward(pf, s.graph.cast<float>(), cf);
  CHECK((cf.out.cast<double>() - cd.out).cwiseAbs().maxCoeff() < 1e-5);
  Parameters gd = m.params.zeros_like();
  auto gf = pf.zeros_like();
  backward(m.params, s.graph, cd, (cd.out - s.target).eval(), gd);
  backward(pf, s.graph.cast<float>(), cf, (cf.out - s.target.cast<float>()).eval(), gf);
  const Parameters gback = gf.cast<double>();
  std::vector<double> a, b;
  Parameters gd_copy = gd, gb_copy = gback;
  gd_copy.for_each_tensor([&](double* d, std::size_t k) { a.insert(a.end(), d, d + k); });
  gb_copy.for_each_tensor([&](double* d, std::size_t k) { b.insert(b.end(), d, d + k); });
  double scale = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, std::abs(a[i]));
    diff = std::max(diff, std::abs(a[i] - b[i]));
  }
  CHECK(diff <= 1e-4 * scale);
}

TEST_CASE("split sizes and determinism") {
  const SplitIndices s = split_indices(5000, 0.75, 3);
  CHECK(std::abs(static_cast<long>(s.train.size()) - 3750) <= 13);
  CHECK(s.train.size() + s.val.size() == 5000);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.val.begin(), s.val.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
  const SplitIndices again = split_indices(5000, 0.75, 3);
  CHECK(again.train == s.train);
  CHECK(again.val == s.val);
  CHECK(split_indices(5000, 0.75, 4).train != s.train);
}

TEST_CASE("train config validation") {
  TrainConfig c;
  c.train_fraction = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(parse_optimizer("sgd") == OptimizerKind::Sgd);
  CHECK(parse_precision("float64") == Precision::Float64);
  CHECK(parse_lr_schedule("constant") == LrSchedule::Constant);
  CHECK_THROWS_AS(parse_optimizer("rmsprop"), ConfigError);
}

TEST_CASE("training fits a small dataset") {
  const Dataset data = small_dataset(50, GraphKind::Voronoi, 21);
  TrainConfig c;
  c.epochs = 200;
  c.batch_size = 10;
  c.learning_rate = 2e-3;
  c.seed = 4;
  const TrainResult r = train(data, c);
  REQUIRE(r.history.size() == 200);
  double best_train = r.history.back().train_loss;
  CHECK(best_train < 0.1 * r.history.front().train_loss);
  for (std::size_t i = 0; i < r.history.size(); ++i) {
    CHECK(r.history[i].epoch == static_cast<int>(i));
    CHECK(r.history[i].seconds >= 0.0);
  }
  // The returned model is the best on validation.
  double best_val = 1e300;
  for (const auto& e : r.history) best_val = std::min(best_val, e.val_loss);
  CHECK(r.history[static_cast<std::size_t>(r.best_epoch)].val_loss == best_val);
}

TEST_CASE("training is deterministic for any thread count") {
  const Dataset data = small_dataset(40, GraphKind::Delaunay, 2);
  for (Precision prec : {Precision::Float32, Precision::Float64}) {
    TrainConfig c;
    c.epochs = 3;
    c.batch_size = 8;
    c.precision = prec;
    c.threads = 1;
    const TrainResult a = train(data, c);
    const TrainResult b = train(data, c);
    c.threads = 3;
    const TrainResult d = train(data, c);
    for (std::size_t i = 0; i < a.history.size(); ++i) {
      CHECK(a.history[i].train_loss == b.history[i].train_loss);
      CHECK(a.history[i].val_loss == b.history[i].val_loss);
      CHECK(a.history[i].train_loss == d.history[i].train_loss);
      CHECK(a.history[i].val_loss == d.history[i].val_loss);
    }
    CHECK(same_model(a.model, d.model));
  }
}

TEST_CASE("divergence raises a training error") {
  const Dataset data = small_dataset(20, GraphKind::Delaunay, 3);
  TrainConfig c;
  c.optimizer = OptimizerKind::Sgd;
  c.schedule = LrSchedule::Constant;
  c.learning_rate = 1e4;
  c.epochs = 20;
  c.batch_size = 5;
  CHECK_THROWS_AS(train(data, c), TrainingError);
  CHECK_THROWS_AS(train(Dataset{}, TrainConfig{}), ArgumentError);
}

TEST_CASE("evaluation of exact and constant predictors") {
  std::mt19937_64 rng(8);
  GcnModel m = init_model(2, 6);
  Dataset perfect;
  for (int i = 0; i < 6; ++i) {
    const TactileGraph g = random_graph(8, 2, rng);
    const PoseEstimate p = gcn_forward(m, g);
    perfect.samples.push_back({g, Eigen::RowVector2d(p.y, p.theta)});
  }
  const EvalReport exact = evaluate(m, perfect);
  CHECK(exact.mae_y == 0.0);
  CHECK(exact.mae_theta == 0.0);
  CHECK(exact.residuals.size() == 6);

  // All-zero weights predict the label mean; on a symmetric label set that is zero.
  Dataset sym;
  const std::vector<double> ys{-2.0, -1.0, -0.5, 0.5, 1.0, 2.0};
  for (double y : ys) sym.samples.push_back({random_graph(5, 2, rng), Eigen::RowVector2d(y, -3.0 * y)});
  GcnModel zero = init_model(2, 0);
  zero.params *= 0.0;
  zero.norm = compute_norm_stats(sym.samples);
  const EvalReport r = evaluate(zero, sym);
  double mean_abs_y = 0.0, mean_abs_t = 0.0;
  for (double y : ys) {
    mean_abs_y += std::abs(y) / ys.size();
    mean_abs_t += std::abs(3.0 * y) / ys.size();
  }
  CHECK(r.mae_y == doctest::Approx(mean_abs_y).epsilon(1e-12));
  CHECK(r.mae_theta == doctest::Approx(mean_abs_t).epsilon(1e-12));
}
