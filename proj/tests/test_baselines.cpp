#include <doctest.h>

#include <random>

#include "gomsp/baselines.hpp"
#include "gomsp/inner_solver.hpp"
#include "gomsp/mirror_geometry.hpp"
#include "oracles.hpp"

using namespace gomsp;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Linear observed loss <v, x> with no curvature: the MOSP/GOMSP examples.
class LinearSlot final : public SlotProblem {
 public:
  LinearSlot(Vector v, Eigen::Index rows, Vector g0 = {}) : v_(std::move(v)), rows_(rows), g0_(g0) {
    if (g0_.size() == 0) g0_ = Vector::Constant(rows_, -0.07);
  }
  Eigen::Index dimension() const override { return v_.size(); }
  Eigen::Index num_constraints() const override { return rows_; }
  double cap() const override { return 1.0; }
  double loss(const Vector& x) const override { return v_.dot(x); }
  Vector loss_gradient(const Vector&) const override { return v_; }
  double observed_loss(const Vector& x) const override { return v_.dot(x); }
  Vector observed_loss_gradient(const Vector&) const override { return v_; }
  Vector constraints(const Vector&) const override { return g0_; }
  Matrix constraint_gradients(const Vector& x) const override { return Matrix::Zero(rows_, x.size()); }

 private:
  Vector v_;
  Eigen::Index rows_;
  Vector g0_;
};

// Convex quadratic 0.5 x'Qx + c'x.
struct Quadratic {
  Matrix q;
  Vector c;
  double operator()(const Vector& x, Vector& grad) const {
    grad = q * x + c;
    return 0.5 * x.dot(q * x) + c.dot(x);
  }
};

Quadratic random_quadratic(Eigen::Index dim, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = normal(gen);
  Quadratic f;
  f.q = a * a.transpose() + 0.1 * Matrix::Identity(dim, dim);
  f.c = Vector(dim);
  for (Eigen::Index i = 0; i < dim; ++i) f.c[i] = 2.0 * normal(gen);
  return f;
}

}  // namespace

TEST_CASE("inner solver examples") {
  ObjectiveOracle half_norm = [](const Vector& x, Vector& g) {
    g = x;
    return 0.5 * x.squaredNorm();
  };
  CHECK(inner_solve_convex(half_norm, 1.0, 2).x.norm() < 1e-8);

  ObjectiveOracle boundary = [](const Vector& x, Vector& g) {
    g = 2.0 * (x.array() - 2.0);
    return (x.array() - 2.0).square().sum();
  };
  CHECK(inner_solve_convex(boundary, 1.0, 1).x[0] == doctest::Approx(1.0).epsilon(1e-8));

  ObjectiveOracle two_terms = [](const Vector& x, Vector& g) {
    g = 2.0 * x + 2.0 * (x.array() - 1.0).matrix();
    return x.squaredNorm() + (x.array() - 1.0).square().sum();
  };
  CHECK(std::abs(inner_solve_convex(two_terms, 1.0, 1).x[0] - 0.5) <= 1e-8);
}

TEST_CASE("inner solver matches grid search on random quadratics") {
  std::mt19937_64 gen(21);
  for (int k = 0; k < 40; ++k) {
    const int dim = 1 + k % 2;
    const Quadratic f = random_quadratic(dim, gen);
    const Vector x = inner_solve_convex(std::cref(f), 1.0, dim).x;
    auto grid = oracle::grid_minimize(
        [&](const Vector& z) {
          Vector g;
          return f(z, g);
        },
        {}, dim, 1.0);
    CHECK((x - grid.x).lpNorm<Eigen::Infinity>() < 1e-3);
  }
}

TEST_CASE("inner solver KKT residual") {
  std::mt19937_64 gen(22);
  for (int k = 0; k < 30; ++k) {
    const Eigen::Index dim = 2 + k % 7;
    const Quadratic f = random_quadratic(dim, gen);
    const auto r = inner_solve_convex(std::cref(f), 1.0, dim);
    Vector g;
    f(r.x, g);
    CHECK((r.x - project_capped_simplex(r.x - g, 1.0)).norm() <= 1e-8);
    CHECK(in_feasible_set(r.x, 1.0));
  }
}

TEST_CASE("inner solver reports the iteration cap with its best iterate") {
  Quadratic f;
  f.q = Matrix::Zero(3, 3);
  f.q.diagonal() = vec({1, 10, 100});
  f.c = vec({-0.1, -0.2, -0.3});
  InnerSolverOptions o;
  o.max_iterations = 2;
  o.tolerance = 1e-14;
  try {
    inner_solve_convex(std::cref(f), 10.0, 3, o);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(e.iterations() == 2);
    CHECK(e.best_iterate().size() == 3);
  }
  CHECK_THROWS_AS(inner_solve_convex(std::cref(f), 1.0, 3, InnerSolverOptions{0.0}),
                  InvalidInputError);
}

TEST_CASE("SDG examples") {
  // D = 1 toy with Lambda = 0: argmin x^2 + (x - 1)^2 = 0.5.
  auto toy = oracle::toy_slot(1.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.25);
  SdgState s = SdgState::initial(1, 1);
  const SdgState n = sdg_step(s, *toy, 0.1);
  CHECK(std::abs(n.primal[0] - 0.5) <= 1e-8);
  // Dual consumes g at the old primal 0: [0 + 0.1 * (-0.25)]_+ = 0.
  CHECK(n.dual[0] == 0.0);

  SdgState frozen = SdgState::initial(1, 1);
  frozen.dual = vec({1});
  CHECK(sdg_step(frozen, *toy, 0.0).dual[0] == 1.0);

  // With a positive multiplier the argmin leans toward feasibility.
  SdgState priced = SdgState::initial(1, 1);
  priced.dual = vec({2});
  const double x = sdg_step(priced, *toy, 0.1).primal[0];
  // Stationarity of x^2 + (x-1)^2 + 2 (x^2 - 0.25): 8x - 2 = 0.
  CHECK(std::abs(x - 0.25) <= 1e-8);
}

TEST_CASE("MOSP examples") {
  MospState s = MospState::initial(2, 1);
  s.primal = vec({0.2, 0.3});
  const MospState fixed = mosp_step(s, LinearSlot(vec({0, 0}), 1), 0.1);
  CHECK(fixed.primal == s.primal);

  const MospState moved = mosp_step(s, LinearSlot(vec({1, -1}), 1), 0.1);
  CHECK((moved.primal - vec({0.1, 0.4})).norm() < 1e-15);
  CHECK(moved.dual[0] == 0.0);

  CHECK_THROWS_AS(mosp_step(s, LinearSlot(vec({1, 1, 1}), 1), 0.1), InvalidInputError);
  CHECK_THROWS_AS(mosp_step(s, LinearSlot(vec({1, 1}), 1), -0.1), InvalidInputError);
}

TEST_CASE("MOSP dual is causal") {
  // g evaluated at the new primal: a constraint that is violated only after
  // the step must already raise the multiplier.
  class Shifted final : public SlotProblem {
   public:
    Eigen::Index dimension() const override { return 1; }
    Eigen::Index num_constraints() const override { return 1; }
    double cap() const override { return 1.0; }
    double loss(const Vector& x) const override { return -x[0]; }
    Vector loss_gradient(const Vector&) const override { return vec({-1}); }
    double observed_loss(const Vector& x) const override { return -x[0]; }
    Vector observed_loss_gradient(const Vector&) const override { return vec({-1}); }
    Vector constraints(const Vector& x) const override { return vec({x[0] - 0.25}); }
    Matrix constraint_gradients(const Vector&) const override { return Matrix::Ones(1, 1); }
  } slot;
  MospState s = MospState::initial(1, 1);
  s.primal = vec({0.2});
  const MospState n = mosp_step(s, slot, 0.5);
  CHECK(n.primal[0] == doctest::Approx(0.7));
  CHECK(n.dual[0] == doctest::Approx(0.5 * 0.45));
}

TEST_CASE("baselines keep primals feasible and duals nonnegative") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> normal(0.0, 2.0);
  MospState m = MospState::initial(3, 2);
  for (int t = 0; t < 100; ++t) {
    Vector v(3);
    Vector g(2);
    for (int i = 0; i < 3; ++i) v[i] = normal(gen);
    for (int r = 0; r < 2; ++r) g[r] = normal(gen);
    LinearSlot slot(v, 2, g);
    m = mosp_step(m, slot, 0.2);
    CHECK(in_feasible_set(m.primal, 1.0));
    CHECK(m.dual.minCoeff() >= 0.0);
  }
  auto toy = oracle::toy_slot(2.0, -1.0, 3.0, 0.8, 1.0, 0.2, 0.1);
  SdgState s = SdgState::initial(1, 1);
  for (int t = 0; t < 30; ++t) {
    s = sdg_step(s, *toy, 0.5);
    CHECK(in_feasible_set(s.primal, 1.0));
    CHECK(s.dual.minCoeff() >= 0.0);
  }
}
