#include <doctest.h>

#include <cmath>
#include <random>

#include "gomsp/constants.hpp"
#include "gomsp/dispatch.hpp"
#include "gomsp/experiment.hpp"
#include "gomsp/rng.hpp"
#include "gomsp/tracking.hpp"
#include "oracles.hpp"

using namespace gomsp;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// D = 2, R = 1 with c = (1, 1), e = (0, 0), a = (5, 5), b = (6, 6), d = 0.7.
struct TwoGenerators {
  DispatchParams params;
  RoundRealization round;

  TwoGenerators() {
    params.dim = 2;
    params.num_constraints = 1;
    params.curvature = Matrix::Ones(1, 2);
    params.slope = Matrix::Zero(1, 2);
    round.true_a = vec({5, 5});
    round.true_b = vec({6, 6});
    round.observed_a = round.true_a;
    round.observed_b = round.true_b;
    round.demand = 0.7;
    round.thresholds = vec({0.2});
  }
};

DispatchParams noiseless(Eigen::Index dim, Eigen::Index rows) {
  DispatchParams p = make_dispatch_params(dim, rows, RngStreams(3));
  p.sigma_a = 0.0;
  p.sigma_b = 0.0;
  p.perturbation_scale = 0.0;
  return p;
}

class ConstantSlot final : public SlotProblem {
 public:
  Eigen::Index dimension() const override { return 2; }
  Eigen::Index num_constraints() const override { return 0; }
  double cap() const override { return 1.0; }
  double loss(const Vector&) const override { return 3.0; }
  Vector loss_gradient(const Vector& x) const override { return Vector::Zero(x.size()); }
  double observed_loss(const Vector&) const override { return 3.0; }
  Vector observed_loss_gradient(const Vector& x) const override { return Vector::Zero(x.size()); }
  Vector constraints(const Vector&) const override { return {}; }
  Matrix constraint_gradients(const Vector& x) const override { return Matrix(0, x.size()); }
};

class LinearConstraintSlot final : public SlotProblem {
 public:
  Eigen::Index dimension() const override { return 1; }
  Eigen::Index num_constraints() const override { return 1; }
  double cap() const override { return 1.0; }
  double loss(const Vector& x) const override { return x[0]; }
  Vector loss_gradient(const Vector&) const override { return vec({1}); }
  double observed_loss(const Vector& x) const override { return x[0]; }
  Vector observed_loss_gradient(const Vector&) const override { return vec({1}); }
  Vector constraints(const Vector& x) const override { return vec({x[0] - 1.0}); }
  Matrix constraint_gradients(const Vector&) const override { return Matrix::Ones(1, 1); }
};

TrackingParams scalar_tracking() {
  TrackingParams p;
  p.system_A = Matrix::Ones(1, 1);
  p.input_B = Matrix::Ones(1, 1);
  p.smoothness_beta = 0.0;
  p.u_min = vec({0});
  p.u_max = vec({1});
  p.initial_state = vec({0});
  p.target_center = vec({1});
  p.target_radius = 0.0;
  return p;
}

}  // namespace

TEST_CASE("dispatch loss examples") {
  TwoGenerators g;
  CHECK(dispatch_loss(vec({0.3, 0.2}), g.round, g.params) == doctest::Approx(4.45).epsilon(1e-12));
  CHECK(dispatch_loss(vec({0, 0}), g.round, g.params) == doctest::Approx(9.8).epsilon(1e-12));
  g.round.demand = 0.0;
  CHECK(dispatch_loss(vec({0, 0}), g.round, g.params) == 0.0);
  CHECK_THROWS_AS(dispatch_loss(vec({0.8, 0.8}), g.round, g.params), DomainError);
  CHECK_THROWS_AS(dispatch_loss(vec({0.1}), g.round, g.params), InvalidInputError);
}

TEST_CASE("dispatch gradient examples") {
  TwoGenerators g;
  CHECK((dispatch_loss_gradient(vec({0.3, 0.2}), g.round, g.params) - vec({1, 0})).norm() < 1e-12);
  g.round.demand = 0.0;
  CHECK((dispatch_loss_gradient(vec({0, 0}), g.round, g.params) - vec({6, 6})).norm() < 1e-12);
  CHECK(dispatch_loss_gradient(vec({0.3, 0.2}), g.round, g.params, true) ==
        dispatch_loss_gradient(vec({0.3, 0.2}), g.round, g.params, false));
}

TEST_CASE("dispatch constraint examples") {
  TwoGenerators g;
  CHECK(dispatch_constraints(vec({0.3, 0.2}), g.round, g.params)[0] == doctest::Approx(-0.07));
  CHECK((dispatch_constraint_gradients(vec({0.3, 0.2}), g.round, g.params) -
         Matrix(vec({0.6, 0.4}).transpose()))
            .norm() < 1e-15);
  CHECK(dispatch_constraints(vec({0, 0}), g.round, g.params)[0] == doctest::Approx(-0.2));

  g.params.curvature.setZero();
  g.params.slope = Matrix(vec({0.3, 0.7}).transpose());
  CHECK(dispatch_constraint_gradients(vec({0.3, 0.2}), g.round, g.params) == g.params.slope);
  const double once = dispatch_constraints(vec({0.2, 0.1}), g.round, g.params)[0] + 0.2;
  const double twice = dispatch_constraints(vec({0.4, 0.2}), g.round, g.params)[0] + 0.2;
  CHECK(twice == doctest::Approx(2.0 * once));

  g.params.curvature.setOnes();
  CHECK(dispatch_constraint_gradients(vec({0, 0}), g.round, g.params) == g.params.slope);
}

TEST_CASE("round generation with zero perturbations follows the sinusoidal means") {
  const DispatchParams p = noiseless(3, 2);
  const RngStreams rng(7);
  const RoundRealization r25 = dispatch_generate_round(p, rng, 25);
  CHECK((r25.true_a.array() - 5.5).abs().maxCoeff() < 1e-12);
  CHECK((r25.true_b.array() - (0.5 * std::sin(M_PI / 4.0) + 6.0)).abs().maxCoeff() < 1e-12);
  CHECK(r25.observed_a == r25.true_a);
  const RoundRealization r125 = dispatch_generate_round(p, rng, 125);
  CHECK(r125.demand == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(r125.thresholds[0] == doctest::Approx(0.05 * std::cos(M_PI * 125.0 / 50.0) + 0.2));
}

TEST_CASE("round generation is deterministic and respects the perturbation ranges") {
  const DispatchParams p = make_dispatch_params(4, 3, RngStreams(5));
  const RngStreams rng(5);
  for (long t = 1; t <= 200; ++t) {
    const RoundRealization a = dispatch_generate_round(p, rng, t, 2, 9);
    const RoundRealization b = dispatch_generate_round(p, rng, t, 2, 9);
    CHECK(a.true_a == b.true_a);
    CHECK(a.observed_b == b.observed_b);
    CHECK(a.demand == b.demand);
    CHECK(a.thresholds == b.thresholds);

    const double td = static_cast<double>(t);
    const double mean_a = 0.5 * std::sin(M_PI * td / 50.0) + 5.0;
    CHECK(a.true_a.minCoeff() >= mean_a);
    CHECK(a.true_a.maxCoeff() <= mean_a + 0.5);
    // Shared draw across generators by default.
    CHECK(a.true_a.maxCoeff() == a.true_a.minCoeff());
    const double mean_d = 0.1 * std::cos(M_PI * td / 125.0) + 0.7;
    CHECK(a.demand >= mean_d);
    CHECK(a.demand <= mean_d + 0.2);
  }
}

TEST_CASE("per-coordinate switches give distinct coordinates") {
  DispatchParams p = make_dispatch_params(4, 3, RngStreams(5));
  p.per_coordinate_draws = true;
  p.per_constraint_thresholds = true;
  const RoundRealization r = dispatch_generate_round(p, RngStreams(5), 10);
  CHECK(r.true_a.maxCoeff() > r.true_a.minCoeff());
  CHECK(r.thresholds.maxCoeff() > r.thresholds.minCoeff());
}

TEST_CASE("observation noise is mean zero") {
  DispatchParams p = make_dispatch_params(1, 0, RngStreams(2));
  const RngStreams rng(2);
  const int n = 100000;
  double sum_a = 0.0;
  double sum_b = 0.0;
  for (int t = 1; t <= n; ++t) {
    const RoundRealization r = dispatch_generate_round(p, rng, t);
    sum_a += r.observed_a[0] - r.true_a[0];
    sum_b += r.observed_b[0] - r.true_b[0];
  }
  CHECK(std::abs(sum_a / n) <= 4.0 * p.sigma_a / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(sum_b / n) <= 4.0 * p.sigma_b / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("every round has the origin as a Slater point") {
  const DispatchParams p = make_dispatch_params(20, 10, RngStreams(1));
  const RngStreams rng(1);
  for (long t = 1; t <= 1000; ++t) {
    const RoundRealization r = dispatch_generate_round(p, rng, t);
    CHECK(dispatch_constraints(Vector::Zero(20), r, p).maxCoeff() < 0.0);
  }
}

TEST_CASE("dispatch loss and constraints are midpoint convex") {
  const DispatchParams p = make_dispatch_params(5, 4, RngStreams(6));
  const RngStreams rng(6);
  std::mt19937_64 gen(6);
  for (int k = 0; k < 500; ++k) {
    const RoundRealization r = dispatch_generate_round(p, rng, 1 + k);
    const Vector x = sample_capped_simplex(5, 1.0, gen);
    const Vector y = sample_capped_simplex(5, 1.0, gen);
    const Vector m = 0.5 * (x + y);
    CHECK(dispatch_loss(m, r, p) <= 0.5 * (dispatch_loss(x, r, p) + dispatch_loss(y, r, p)) + 1e-12);
    const Vector gm = dispatch_constraints(m, r, p);
    const Vector avg = 0.5 * (dispatch_constraints(x, r, p) + dispatch_constraints(y, r, p));
    CHECK((gm - avg).maxCoeff() <= 1e-12);
  }
}

TEST_CASE("tracking loss and gradient examples") {
  TrackingParams p = scalar_tracking();
  CHECK(tracking_loss_gradient(vec({0}), vec({0}), vec({1}), p)[0] == doctest::Approx(-2.0));
  CHECK(tracking_loss(vec({0.25}), vec({0}), vec({1}), p) == doctest::Approx(0.5625));

  TrackingParams planar = TrackingParams::planar_default();
  planar.system_A = Matrix::Identity(2, 2);
  planar.smoothness_beta = 0.0;
  const Vector x = vec({0.4, -0.3});
  CHECK(tracking_loss_gradient(vec({0, 0}), x, x, planar).norm() == 0.0);
  CHECK_THROWS_AS(tracking_loss_gradient(vec({0}), x, x, planar), InvalidInputError);
}

TEST_CASE("tracking gradient matches finite differences") {
  const TrackingParams p = TrackingParams::planar_default();
  std::mt19937_64 gen(17);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const Vector u = sample_capped_simplex(2, p.cap, gen);
    const Vector x = vec({normal(gen), normal(gen)});
    const Vector y = p.target(k);
    const Vector fd = oracle::central_difference(
        [&](const Vector& v) { return tracking_loss(v, x, y, p); }, u);
    const Vector an = tracking_loss_gradient(u, x, y, p);
    CHECK((fd - an).lpNorm<Eigen::Infinity>() <= 1e-5 * std::max(1.0, an.lpNorm<Eigen::Infinity>()));
    const Matrix jac = tracking_constraint_gradients(u, p);
    for (Eigen::Index r = 0; r < p.num_constraints(); ++r) {
      const Vector fr = oracle::central_difference(
          [&](const Vector& v) { return tracking_constraints(v, p)[r]; }, u);
      CHECK((fr - jac.row(r).transpose()).lpNorm<Eigen::Infinity>() <= 1e-5);
    }
  }
}

TEST_CASE("tracking environment advances its state on commit") {
  auto p = std::make_shared<TrackingParams>(scalar_tracking());
  TrackingEnvironment env(p, RngStreams(1), 0);
  CHECK(env.depends_on_actions());
  auto slot = env.reveal(1);
  CHECK(slot->loss(vec({0})) == doctest::Approx(1.0));
  env.commit(vec({0.5}));
  CHECK(env.state()[0] == doctest::Approx(0.5));
  auto next = env.reveal(2);
  CHECK(next->loss(vec({0.5})) == doctest::Approx(0.0));
}

TEST_CASE("constant estimation examples") {
  std::mt19937_64 gen(1);
  const PenaltyTransform h{1.0};

  const ConstantsEstimate flat = estimate_constants(
      [](long) { return std::make_unique<ConstantSlot>(); }, Regularizer::euclidean(1.0, 2), h, 1,
      10, 20, gen);
  CHECK(flat.c2 == 0.0);
  CHECK(flat.loss_lipschitz == 0.0);

  const ConstantsEstimate slack = estimate_constants(
      [](long) { return std::make_unique<LinearConstraintSlot>(); }, Regularizer::euclidean(1.0, 1),
      h, 1, 10, 20, gen);
  CHECK(slack.c3 == 0.0);
  CHECK(slack.sample_count == 20);

  // D = 1 toy, d swept over [0.6, 0.8]: sup |2ax + b + 2 xi (x - d)| = 10 + 6 + 16 at x = 1, d = 0.6.
  const ConstantsEstimate lf = estimate_constants(
      [](long t) {
        return oracle::toy_slot(5.0, 6.0, 20.0, 0.6 + 0.002 * static_cast<double>(t), 0.0, 0.0,
                                1.0);
      },
      Regularizer::euclidean(1.0, 1), h, 0, 100, 400, gen);
  CHECK(lf.loss_lipschitz <= 32.0 + 1e-12);
  CHECK(lf.loss_lipschitz >= 31.5);

  CHECK_THROWS_AS(estimate_constants([](long) { return std::make_unique<ConstantSlot>(); },
                                     Regularizer::euclidean(1.0, 2), h, 1, 10, 0, gen),
                  InvalidInputError);
}

TEST_CASE("random substreams are keyed, not sequential") {
  const RngStreams rng(42);
  CHECK(rng.derive_seed(streams::kDemand, 0, 1) == RngStreams(42).derive_seed(streams::kDemand, 0, 1));
  CHECK(rng.derive_seed(streams::kDemand, 0, 1) != rng.derive_seed(streams::kThresholds, 0, 1));
  CHECK(rng.derive_seed(streams::kDemand, 0, 1) != rng.derive_seed(streams::kDemand, 1, 1));
  CHECK(rng.derive_seed(streams::kDemand, 0, 1) != rng.derive_seed(streams::kDemand, 0, 2));
  CHECK(rng.derive_seed(streams::kDemand, 0, 1) != RngStreams(43).derive_seed(streams::kDemand, 0, 1));

  // Sampling one stream heavily does not move another.
  auto a = rng.generator(streams::kCoefficientNoise, 3, 5);
  for (int i = 0; i < 1000; ++i) (void)rng.generator(streams::kObservationNoise, 3, 5)();
  auto b = rng.generator(streams::kCoefficientNoise, 3, 5);
  CHECK(a() == b());

  // Weak correlation check between two named streams.
  auto x = rng.generator(streams::kDemand, 0, 0);
  auto y = rng.generator(streams::kThresholds, 0, 0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double cross = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) cross += u(x) * u(y);
  CHECK(std::abs(cross / n) < 4.0 / (3.0 * std::sqrt(static_cast<double>(n))));
}

TEST_CASE("noise index moves only the observation noise") {
  const DispatchParams p = make_dispatch_params(3, 2, RngStreams(8));
  const RngStreams rng(8);
  const RoundRealization a = dispatch_generate_round(p, rng, 17, 0, 0);
  const RoundRealization b = dispatch_generate_round(p, rng, 17, 0, 1);
  CHECK(a.true_a == b.true_a);
  CHECK(a.true_b == b.true_b);
  CHECK(a.demand == b.demand);
  CHECK(a.thresholds == b.thresholds);
  CHECK(a.observed_b != b.observed_b);
}

TEST_CASE("the environment does not depend on the algorithm under test") {
  ExperimentConfig gomsp;
  gomsp.dispatch.dim = 4;
  gomsp.dispatch.num_constraints = 3;
  gomsp.horizon = 20;
  gomsp.warmup = 0;
  ExperimentConfig sdg = gomsp;
  sdg.algorithm.kind = AlgorithmKind::Sdg;
  ExperimentConfig mosp = gomsp;
  mosp.algorithm.kind = AlgorithmKind::Mosp;
  mosp.algorithm.regularizer = RegularizerKind::Euclidean;

  std::mt19937_64 gen(4);
  for (int sample : {0, 3}) {
    auto e1 = make_environment(gomsp, sample);
    auto e2 = make_environment(sdg, sample);
    auto e3 = make_environment(mosp, sample);
    for (long t = 1; t <= 20; ++t) {
      auto s1 = e1->reveal(t);
      auto s2 = e2->reveal(t);
      auto s3 = e3->reveal(t);
      const Vector x = sample_capped_simplex(4, 1.0, gen);
      CHECK(s1->loss(x) == s2->loss(x));
      CHECK(s1->observed_loss(x) == s3->observed_loss(x));
      CHECK(s1->constraints(x) == s3->constraints(x));
    }
  }
}
