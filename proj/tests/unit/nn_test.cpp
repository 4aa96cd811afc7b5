#include <doctest.h>

#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "losstopo/error.hpp"
#include "losstopo/nn/fisher.hpp"
#include "losstopo/nn/network.hpp"
#include "losstopo/nn/serialize.hpp"
#include "losstopo/nn/train.hpp"

using namespace losstopo;
using namespace losstopo::nn;

namespace {

NetworkArch make_arch(std::vector<std::size_t> sizes, Activation act = Activation::kRelu,
                      OutputHead head = OutputHead::kSoftmaxCrossEntropy) {
  NetworkArch a;
  a.layer_sizes = std::move(sizes);
  a.activation = act;
  a.head = head;
  return a;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

}  // namespace

TEST_CASE("init_params: layout, zero biases, determinism") {
  const auto arch = make_arch({2, 3, 2});
  CHECK(arch.param_count() == 17);  // 2*3 + 3 + 3*2 + 2
  const auto a = init_params(arch, 42);
  const auto b = init_params(arch, 42);
  CHECK(a.size() == 17);
  CHECK(a == b);
  CHECK(!(a == init_params(arch, 43)));

  const auto small = init_params(make_arch({2, 2}), 7);
  CHECK(small.values.tail(2).isZero(0.0));
  // Biases of both layers of the 2-3-2 net.
  CHECK(a.values.segment(6, 3).isZero(0.0));
  CHECK(a.values.segment(15, 2).isZero(0.0));
}

TEST_CASE("init_params: weight scale is 1/sqrt(fan_in)") {
  const auto arch = make_arch({400, 300, 1});
  const auto theta = init_params(arch, 3);
  const Eigen::VectorXd w = theta.values.head(400 * 300);
  const double sd = std::sqrt(w.squaredNorm() / static_cast<double>(w.size()));
  CHECK(sd == doctest::Approx(1.0 / 20.0).epsilon(0.02));
}

TEST_CASE("NetworkArch validation") {
  CHECK_THROWS_AS(make_arch({3}).validate(), ConfigError);
  CHECK_THROWS_AS(make_arch({3, 0, 2}).validate(), ConfigError);
  CHECK_THROWS_AS(ParamVector(make_arch({2, 2}), Eigen::VectorXd::Zero(5)), DimensionError);
}

TEST_CASE("forward: zero identity network gives zero logits") {
  const auto arch = make_arch({3, 4, 2}, Activation::kIdentity);
  const ParamVector theta(arch, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(arch.param_count())));
  const auto r = forward(theta, testutil::random_matrix(5, 3, 1));
  CHECK(r.logits.isZero(0.0));
  CHECK(r.logits.rows() == 5);
  CHECK(r.penultimate.cols() == 4);
}

TEST_CASE("forward: rows are independent") {
  const auto arch = make_arch({3, 5, 2});
  const auto theta = init_params(arch, 9);
  Eigen::MatrixXd x(2, 3);
  x.row(0) = testutil::random_matrix(1, 3, 4);
  x.row(1) = x.row(0);
  const auto r = forward(theta, x);
  CHECK(r.logits.row(0) == r.logits.row(1));
  CHECK(r.penultimate.row(0) == r.penultimate.row(1));
}

TEST_CASE("forward: head affine map over penultimate reproduces logits") {
  const auto arch = make_arch({4, 6, 5, 3}, Activation::kTanh);
  const auto theta = init_params(arch, 11);
  const auto x = testutil::random_matrix(7, 4, 12);
  const auto r = forward(theta, x);
  testutil::ReferenceNet ref{arch, theta.values};
  for (Eigen::Index i = 0; i < 7; ++i) {
    for (std::size_t o = 0; o < 3; ++o) {
      double z = ref.b(2, o);
      for (std::size_t h = 0; h < 5; ++h) z += ref.w(2, o, h) * r.penultimate(i, static_cast<Eigen::Index>(h));
      CHECK(z == doctest::Approx(r.logits(i, static_cast<Eigen::Index>(o))).epsilon(1e-12));
    }
    const auto ref_logits = ref.logits(x.row(i));
    for (std::size_t o = 0; o < 3; ++o)
      CHECK(ref_logits[o] == doctest::Approx(r.logits(i, static_cast<Eigen::Index>(o))).epsilon(1e-12));
  }
}

TEST_CASE("forward: input width mismatch") {
  const auto arch = make_arch({3, 2});
  CHECK_THROWS_AS(forward(init_params(arch, 1), Eigen::MatrixXd::Zero(2, 4)), DimensionError);
}

TEST_CASE("loss: exact MSE fit is zero") {
  const auto arch = make_arch({2, 3, 2}, Activation::kTanh, OutputHead::kMeanSquaredError);
  const auto theta = init_params(arch, 5);
  LabeledData b;
  b.inputs = testutil::random_matrix(6, 2, 3);
  b.targets = forward(theta, b.inputs).logits;
  CHECK(loss(theta, b) == 0.0);
}

TEST_CASE("loss: uniform logits give ln k") {
  for (std::size_t k : {2u, 3u, 10u}) {
    const auto arch = make_arch({3, k});
    const ParamVector theta(arch, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(arch.param_count())));
    auto b = testutil::random_batch(arch, 8, 2);
    CHECK(loss(theta, b) == doctest::Approx(std::log(static_cast<double>(k))).epsilon(1e-14));
  }
}

TEST_CASE("loss: agrees with reference implementation") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto head = seed % 2 ? OutputHead::kMeanSquaredError : OutputHead::kSoftmaxCrossEntropy;
    const auto act = static_cast<Activation>(seed % 3);
    const auto arch = make_arch({3, 5, 4}, act, head);
    const auto theta = init_params(arch, seed);
    const auto batch = testutil::random_batch(arch, 9, seed + 100);
    CHECK(loss(theta, batch) == doctest::Approx(testutil::ReferenceNet{arch, theta.values}.loss(batch)).epsilon(1e-12));
  }
}

TEST_CASE("loss: empty batch throws") {
  const auto arch = make_arch({2, 2});
  LabeledData empty;
  empty.inputs.resize(0, 2);
  CHECK_THROWS_AS(loss(init_params(arch, 1), empty), DimensionError);
  CHECK_THROWS_AS(grad(init_params(arch, 1), empty), DimensionError);
}

TEST_CASE("grad: central finite differences") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto head = seed % 2 ? OutputHead::kMeanSquaredError : OutputHead::kSoftmaxCrossEntropy;
    const auto act = seed < 3 ? Activation::kTanh : Activation::kRelu;
    const auto arch = make_arch({4, 8, 6, 3}, act, head);
    const auto theta = init_params(arch, seed + 10);
    const auto batch = testutil::random_batch(arch, 12, seed + 20);
    const auto g = grad(theta, batch);
    std::vector<std::size_t> coords(arch.param_count());
    std::iota(coords.begin(), coords.end(), 0);
    std::shuffle(coords.begin(), coords.end(), std::mt19937_64(seed));
    coords.resize(50);
    for (auto c : coords) {
      Eigen::VectorXd plus = theta.values, minus = theta.values;
      plus[static_cast<Eigen::Index>(c)] += 1e-5;
      minus[static_cast<Eigen::Index>(c)] -= 1e-5;
      const double fd = (testutil::ReferenceNet{arch, plus}.loss(batch) - testutil::ReferenceNet{arch, minus}.loss(batch)) / 2e-5;
      CHECK(rel_err(g[static_cast<Eigen::Index>(c)], fd) < 1e-4);
    }
  }
}

TEST_CASE("grad: vanishes at an exact least-squares minimum") {
  const auto arch = make_arch({3, 2}, Activation::kIdentity, OutputHead::kMeanSquaredError);
  const auto theta = init_params(arch, 4);
  LabeledData b;
  b.inputs = testutil::random_matrix(10, 3, 8);
  b.targets = forward(theta, b.inputs).logits;
  CHECK(grad(theta, b).norm() < 1e-10);
}

TEST_CASE("grad: duplicating the batch leaves the mean-loss gradient unchanged") {
  const auto arch = make_arch({3, 4, 2}, Activation::kTanh);
  const auto theta = init_params(arch, 2);
  const auto b = testutil::random_batch(arch, 5, 3);
  std::vector<std::size_t> twice = {0, 1, 2, 3, 4, 0, 1, 2, 3, 4};
  const auto g1 = grad(theta, b);
  const auto g2 = grad(theta, b.subset(twice));
  CHECK(max_abs_diff(g1, g2) < 1e-14);
}

TEST_CASE("per_example_grads average to the batch gradient") {
  const auto arch = make_arch({3, 4, 3}, Activation::kTanh);
  const auto theta = init_params(arch, 6);
  const auto b = testutil::random_batch(arch, 7, 1);
  const Eigen::MatrixXd g = per_example_grads(theta, b);
  CHECK(max_abs_diff(g.colwise().mean().transpose(), grad(theta, b)) < 1e-14);
}

TEST_CASE("train: zero learning rate keeps every point at theta0") {
  const auto arch = make_arch({2, 4, 2});
  DatasetSpec spec;
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.epochs = 2;
  cfg.batch_size = 50;
  cfg.record_every = 1;
  const auto theta0 = init_params(arch, 1);
  const auto t = train(arch, spec, cfg, theta0);
  CHECK(t.size() == 9);  // 4 steps per epoch, 2 epochs, plus the initialization
  for (const auto& p : t.points) CHECK(p == theta0.values);
}

TEST_CASE("train: freezing every layer keeps the trajectory constant") {
  const auto arch = make_arch({2, 4, 2});
  TrainConfig cfg;
  cfg.learning_rate = 0.5;
  cfg.frozen_prefix = 2;
  cfg.epochs = 1;
  const auto theta0 = init_params(arch, 1);
  for (auto opt : {Optimizer::kSgd, Optimizer::kAdam}) {
    cfg.optimizer = opt;
    const auto t = train(arch, DatasetSpec{}, cfg, theta0);
    for (const auto& p : t.points) CHECK(p == theta0.values);
  }
}

TEST_CASE("train: frozen prefix leaves leading layers bit-identical") {
  const auto arch = make_arch({2, 5, 3, 2});
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.frozen_prefix = 2;
  cfg.epochs = 2;
  cfg.record_every = 3;
  const auto theta0 = init_params(arch, 8);
  const auto t = train(arch, DatasetSpec{}, cfg, theta0);
  const auto frozen = static_cast<Eigen::Index>(arch.layer_offset(2));
  for (const auto& p : t.points) CHECK(p.head(frozen) == theta0.values.head(frozen));
  CHECK(t.back().values.tail(8) != theta0.values.tail(8));
}

TEST_CASE("train: single linear unit decays geometrically") {
  // Inputs +-1 decouple weight and bias; both have unit curvature under
  // 0.5 * squared error, so each error shrinks by (1 - lr) per full-batch step.
  const auto arch = make_arch({1, 1}, Activation::kIdentity, OutputHead::kMeanSquaredError);
  LabeledData data;
  data.inputs.resize(2, 1);
  data.inputs << -1.0, 1.0;
  data.targets.resize(2, 1);
  const double w_star = 0.7, b_star = -0.3;
  data.targets << -w_star + b_star, w_star + b_star;
  Eigen::VectorXd v(2);
  v << 2.0, 1.5;
  const ParamVector theta0(arch, v);
  TrainConfig cfg;
  cfg.learning_rate = 0.2;
  cfg.batch_size = 2;
  cfg.epochs = 15;
  const auto t = train(arch, data, cfg, theta0);
  REQUIRE(t.size() == 16);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double f = std::pow(1.0 - cfg.learning_rate, static_cast<double>(k));
    CHECK(t.points[k][0] - w_star == doctest::Approx(f * (2.0 - w_star)).epsilon(1e-12));
    CHECK(t.points[k][1] - b_star == doctest::Approx(f * (1.5 - b_star)).epsilon(1e-12));
  }
  for (std::size_t k = 1; k < t.size(); ++k) CHECK(t.losses[k] <= t.losses[k - 1]);
}

TEST_CASE("train: full-batch descent on a convex surrogate never increases the loss") {
  const auto arch = make_arch({3, 1}, Activation::kIdentity, OutputHead::kMeanSquaredError);
  DatasetSpec spec;
  spec.kind = DatasetKind::kTwoValleyRegression;
  spec.input_dim = 3;
  spec.n_classes = 1;
  spec.n_train = 64;
  TrainConfig cfg;
  cfg.learning_rate = 0.3;
  cfg.batch_size = 64;
  cfg.epochs = 30;
  const auto t = train(arch, spec, cfg, init_params(arch, 2));
  for (std::size_t k = 1; k < t.size(); ++k) CHECK(t.losses[k] <= t.losses[k - 1]);
}

TEST_CASE("train: recording stride and final point") {
  const auto arch = make_arch({2, 3, 2});
  TrainConfig cfg;
  cfg.batch_size = 32;
  cfg.epochs = 1;
  cfg.record_every = 3;  // 200 examples -> 7 steps
  const auto t = train(arch, DatasetSpec{}, cfg, init_params(arch, 0));
  CHECK(t.steps == std::vector<std::size_t>{0, 3, 6, 7});
  cfg.record_every = 8;
  CHECK_THROWS_AS(train(arch, DatasetSpec{}, cfg, init_params(arch, 0)), ConfigError);
}

TEST_CASE("train: identical inputs give bit-identical serialized trajectories") {
  const auto arch = make_arch({2, 6, 2});
  DatasetSpec spec;
  spec.seed = 3;
  TrainConfig cfg;
  cfg.optimizer = Optimizer::kAdam;
  cfg.learning_rate = 0.01;
  cfg.epochs = 3;
  cfg.record_every = 4;
  cfg.seed = 5;
  const auto a = to_json(train(arch, spec, cfg, init_params(arch, 1))).dump();
  const auto b = to_json(train(arch, spec, cfg, init_params(arch, 1))).dump();
  CHECK(a == b);
}

TEST_CASE("train: divergence aborts with the last valid point") {
  const auto arch = make_arch({2, 8, 2}, Activation::kIdentity, OutputHead::kMeanSquaredError);
  DatasetSpec spec;
  TrainConfig cfg;
  cfg.learning_rate = 50.0;
  cfg.epochs = 20;
  cfg.batch_size = 200;
  const auto theta0 = init_params(arch, 3);
  try {
    train(arch, spec, cfg, theta0);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    const auto& p = e.partial();
    CHECK(p.size() >= 1);
    CHECK(p.points.front() == theta0.values);
    CHECK(e.last_valid().all_finite());
    CHECK(loss(e.last_valid(), make_dataset(spec).train) <= kDivergenceLoss);
  }
}

TEST_CASE("train: trajectory JSON round-trips exactly") {
  const auto arch = make_arch({2, 3, 2}, Activation::kTanh);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.record_every = 2;
  const auto t = train(arch, DatasetSpec{}, cfg, init_params(arch, 4));
  const auto back = trajectory_from_json(nlohmann::json::parse(to_json(t).dump()));
  CHECK(back.arch == t.arch);
  CHECK(back.dataset == t.dataset);
  CHECK(back.config == t.config);
  CHECK(back.points == t.points);
  CHECK(back.losses == t.losses);
  CHECK(back.steps == t.steps);
}

TEST_CASE("empirical Fisher: single example is g g^T") {
  const auto arch = make_arch({3, 4, 3}, Activation::kTanh);
  const auto theta = init_params(arch, 2);
  const auto b = testutil::random_batch(arch, 1, 5);
  const auto g = grad(theta, b);
  const auto f = empirical_fisher(theta, b);
  CHECK((f - g * g.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(f);
  lu.setThreshold(1e-12);
  CHECK(lu.rank() <= 1);
}

TEST_CASE("empirical Fisher: PSD on random probes") {
  const auto arch = make_arch({3, 5, 3});
  const auto theta = init_params(arch, 3);
  const auto b = testutil::random_batch(arch, 10, 5);
  const auto f = empirical_fisher(theta, b);
  CHECK((f - f.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto x = testutil::random_vector(f.rows(), s);
    CHECK(x.dot(f * x) >= -1e-12);
  }
}

TEST_CASE("empirical Fisher: matrix-free operator matches explicit matrix on basis vectors") {
  const auto arch = make_arch({2, 3, 2}, Activation::kTanh);  // 17 parameters
  const auto theta = init_params(arch, 3);
  const auto b = testutil::random_batch(arch, 6, 9);
  const FisherOperator op(theta, b);
  // Explicit matrix assembled from the outer products directly.
  const Eigen::MatrixXd g = per_example_grads(theta, b);
  Eigen::MatrixXd explicit_f = Eigen::MatrixXd::Zero(17, 17);
  for (Eigen::Index i = 0; i < g.rows(); ++i) explicit_f += g.row(i).transpose() * g.row(i);
  explicit_f /= static_cast<double>(g.rows());
  for (Eigen::Index c = 0; c < 17; ++c) {
    const Eigen::VectorXd e = Eigen::VectorXd::Unit(17, c);
    CHECK(max_abs_diff(op.apply(e), explicit_f.col(c)) < 1e-14);
  }
}

TEST_CASE("empirical Fisher: MSE head is rejected") {
  const auto arch = make_arch({2, 2}, Activation::kRelu, OutputHead::kMeanSquaredError);
  CHECK_THROWS_AS(empirical_fisher(init_params(arch, 1), testutil::random_batch(arch, 3, 1)), ConfigError);
}

TEST_CASE("natural gradient: dense-solve oracle") {
  const auto arch = make_arch({2, 3, 2}, Activation::kTanh);
  const auto theta = init_params(arch, 5);
  const auto b = testutil::random_batch(arch, 8, 6);
  const double lr = 0.1, d = 1e-2;
  const auto next = natural_gradient_step(theta, b, lr, d);
  const Eigen::MatrixXd a = empirical_fisher(theta, b) + d * Eigen::MatrixXd::Identity(17, 17);
  const Eigen::VectorXd x = a.ldlt().solve(grad(theta, b));
  const Eigen::VectorXd expected = theta.values - lr * x;
  CHECK((next.values - expected).norm() <= 1e-5 * (lr * x).norm());
}

TEST_CASE("natural gradient: zero per-example gradients give a vanilla step scaled by 1/d") {
  // Saturated softmax: every correct logit is 1000 above the rest, so every
  // per-example gradient (and F) is exactly zero.
  const auto arch = make_arch({1, 2}, Activation::kIdentity);
  Eigen::VectorXd v(4);
  v << 0.0, 0.0, 1000.0, 0.0;
  const ParamVector theta(arch, v);
  LabeledData b;
  b.inputs = Eigen::MatrixXd::Ones(3, 1);
  b.labels = {0, 0, 0};
  CHECK(empirical_fisher(theta, b).isZero(0.0));
  const double d = 0.5, lr = 0.1;
  const auto next = natural_gradient_step(theta, b, lr, d);
  CHECK(next.values == theta.values - lr * grad(theta, b) / d);
}

TEST_CASE("natural gradient: huge damping gives a vanishing step; d * step tends to the gradient step") {
  const auto arch = make_arch({3, 4, 3}, Activation::kTanh);
  const auto theta = init_params(arch, 7);
  const auto b = testutil::random_batch(arch, 10, 8);
  const Eigen::VectorXd vanilla = -0.1 * grad(theta, b);
  const auto tiny = natural_gradient_step(theta, b, 0.1, 1e9);
  CHECK((tiny.values - theta.values).norm() < 1e-9 * vanilla.norm());
  const double d = 1e6;
  const Eigen::VectorXd scaled = d * (natural_gradient_step(theta, b, 0.1, d).values - theta.values);
  CHECK((scaled - vanilla).norm() < 1e-3 * vanilla.norm());
}

TEST_CASE("natural gradient: damping must be positive; CG cap reports residual") {
  const auto arch = make_arch({3, 4, 3}, Activation::kTanh);
  const auto theta = init_params(arch, 7);
  const auto b = testutil::random_batch(arch, 10, 8);
  CHECK_THROWS_AS(natural_gradient_step(theta, b, 0.1, 0.0), ConfigError);
  NaturalGradientOptions opts;
  opts.max_iterations = 1;
  opts.cg_tolerance = 1e-14;
  try {
    natural_gradient_step(theta, b, 0.1, 1e-4, opts);
    FAIL("expected CG failure");
  } catch (const CgError& e) {
    CHECK(e.residual() > 1e-14);
  }
}

TEST_CASE("train: natural-gradient optimizer reduces the loss") {
  const auto arch = make_arch({2, 6, 2}, Activation::kTanh);
  TrainConfig cfg;
  cfg.optimizer = Optimizer::kNaturalGradient;
  cfg.learning_rate = 0.2;
  cfg.damping = 1e-2;
  cfg.epochs = 3;
  cfg.record_every = 5;
  const auto t = train(arch, DatasetSpec{}, cfg, init_params(arch, 2));
  CHECK(t.losses.back() < t.losses.front());
}

TEST_CASE("load_idx: handcrafted 2-image 3x3 fixture") {
  const auto dir = testutil::temp_dir("idx");
  std::vector<unsigned char> images = {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 3, 0, 0, 0, 3};
  for (int i = 0; i < 18; ++i) images.push_back(static_cast<unsigned char>(i * 15));
  testutil::write_bytes(dir / "img", images);
  testutil::write_bytes(dir / "lbl", {0, 0, 8, 1, 0, 0, 0, 2, 7, 3});
  const auto data = load_idx(dir / "img", dir / "lbl");
  REQUIRE(data.inputs.rows() == 2);
  REQUIRE(data.inputs.cols() == 9);
  for (int i = 0; i < 18; ++i) CHECK(data.inputs(i / 9, i % 9) == (i * 15) / 255.0);
  CHECK(data.labels == std::vector<int>{7, 3});
  CHECK(data.inputs(1, 8) == 1.0);

  testutil::write_bytes(dir / "bad_lbl", {0, 0, 8, 3, 0, 0, 0, 2, 7, 3});
  CHECK_THROWS_WITH_AS(read_idx_labels(dir / "bad_lbl"), doctest::Contains("wrong magic"), FormatError);
  testutil::write_bytes(dir / "empty", {});
  CHECK_THROWS_WITH_AS(read_idx_images(dir / "empty"), doctest::Contains("truncated"), FormatError);
  images.pop_back();
  testutil::write_bytes(dir / "short", images);
  CHECK_THROWS_WITH_AS(read_idx_images(dir / "short"), doctest::Contains("truncated"), FormatError);
  testutil::write_bytes(dir / "lbl3", {0, 0, 8, 1, 0, 0, 0, 3, 7, 3, 1});
  CHECK_THROWS_WITH_AS(load_idx(dir / "img", dir / "lbl3"), doctest::Contains("mismatch"), FormatError);
}

TEST_CASE("datasets: reproducible from seed and validated") {
  for (auto kind : {DatasetKind::kGaussianBlobs, DatasetKind::kTwoMoons, DatasetKind::kConcentricCircles}) {
    DatasetSpec s;
    s.kind = kind;
    s.seed = 17;
    const auto a = make_dataset(s), b = make_dataset(s);
    CHECK(a.train.inputs == b.train.inputs);
    CHECK(a.test.labels == b.test.labels);
    CHECK(a.train.size() == 200);
  }
  DatasetSpec bad;
  bad.input_dim = 3;
  CHECK_THROWS_AS(make_dataset(bad), ConfigError);
  bad = {};
  bad.kind = DatasetKind::kIdxFiles;
  CHECK_THROWS_AS(make_dataset(bad), ConfigError);
}

TEST_CASE("select_classes relabels in the requested order") {
  DatasetSpec s;
  s.kind = DatasetKind::kGaussianBlobs;
  s.n_classes = 4;
  s.input_dim = 3;
  const auto d = make_dataset(s).train;
  const std::vector<int> keep = {3, 1};
  const auto sub = select_classes(d, keep);
  CHECK(sub.size() == 100);
  for (std::size_t i = 0; i < sub.size(); ++i) CHECK((sub.labels[i] == 0 || sub.labels[i] == 1));
}
