#include <doctest.h>

#include <cmath>
#include <random>

#include "gomsp/constants.hpp"
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

Regularizer entropy2() { return Regularizer::smoothed_entropy(0.5, 1.0, 2); }

}  // namespace

TEST_CASE("projection examples") {
  CHECK((project_capped_simplex(vec({0.2, 0.3}), 1.0) - vec({0.2, 0.3})).norm() < 1e-15);
  CHECK((project_capped_simplex(vec({-1, -1}), 1.0)).norm() == 0.0);

  const Vector p = project_capped_simplex(vec({2, 0}), 1.0);
  CHECK((p - vec({1, 0})).norm() < 1e-12);
  auto g = oracle::grid_minimize([](const Vector& x) { return (vec({2, 0}) - x).squaredNorm(); },
                                 {}, 2, 1.0);
  CHECK((g.x - p).norm() < 1e-3);
}

TEST_CASE("projection rejects non-finite input") {
  CHECK_THROWS_AS(project_capped_simplex(vec({NAN, 0}), 1.0), InvalidInputError);
}

TEST_CASE("projection matches the bisection oracle") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int k = 0; k < 500; ++k) {
    const Eigen::Index dim = 1 + k % 9;
    Vector y(dim);
    for (Eigen::Index i = 0; i < dim; ++i) y[i] = normal(gen);
    const double cap = 0.5 + (k % 4);
    CHECK((project_capped_simplex(y, cap) - oracle::projection_by_bisection(y, cap)).norm() < 1e-9);
  }
}

TEST_CASE("mirror map examples") {
  CHECK((mirror_map(vec({0.2, 0.3}), Regularizer::euclidean(1.0, 2)) - vec({0.2, 0.3})).norm() <
        1e-15);
  CHECK(mirror_map(vec({0, 0}), entropy2()).norm() == 0.0);
  CHECK((mirror_map(vec({10, 10}), entropy2()) - vec({0.5, 0.5})).norm() < 1e-9);

  // Grid argmax of <y, x> - psi(x) as an independent check.
  const Vector y = vec({0.3, 1.4});
  auto g = oracle::grid_minimize(
      [&](const Vector& x) { return oracle::entropy(x, 0.5) - y.dot(x); }, {}, 2, 1.0);
  CHECK((mirror_map(y, entropy2()) - g.x).norm() < 1e-3);
}

TEST_CASE("regularizer and conjugate examples") {
  CHECK(regularizer_value(vec({1, 0}), Regularizer::euclidean(1.0, 2)) == doctest::Approx(0.5));
  CHECK(regularizer_value(vec({0, 0}), entropy2()) == doctest::Approx(-0.693147).epsilon(1e-6));
  CHECK(regularizer_value(vec({0.5, 0.5}), entropy2()) == doctest::Approx(0.0));
  CHECK_THROWS_AS(regularizer_value(vec({0.8, 0.8}), entropy2()), DomainError);

  CHECK(conjugate_value(vec({0, 0}), Regularizer::euclidean(1.0, 2)) == doctest::Approx(0.0));
  CHECK(conjugate_value(vec({0, 0}), entropy2()) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(conjugate_value(vec({0.2, 0.3}), Regularizer::euclidean(1.0, 2)) ==
        doctest::Approx(0.065));
}

TEST_CASE("Fenchel coupling examples") {
  const Regularizer euc = Regularizer::euclidean(1.0, 2);
  const Vector y = vec({0.2, 0.3});
  CHECK(std::abs(fenchel_coupling(mirror_map(y, euc), y, euc)) < 1e-15);
  CHECK(std::abs(fenchel_coupling(mirror_map(vec({1.7, -0.4}), entropy2()), vec({1.7, -0.4}),
                                  entropy2())) < 1e-9);
  CHECK(fenchel_coupling(vec({0.5, 0}), y, euc) == doctest::Approx(0.09));
  CHECK(fenchel_coupling(vec({0.5, 0.5}), vec({0, 0}), entropy2()) ==
        doctest::Approx(0.693147).epsilon(1e-6));
  CHECK_THROWS_AS(fenchel_coupling(vec({-0.1, 0}), y, euc), DomainError);
}

TEST_CASE("geometry constants") {
  const GeometryConstants e = geometry_constants(Regularizer::euclidean(1.0, 20));
  CHECK(e.strong_convexity_K == 1.0);
  CHECK(e.steepness_L_psi == 1.0);
  CHECK(e.diameter_term_D_psi == 1.0);
  CHECK(e.set_diameter_D_X == doctest::Approx(std::sqrt(2.0)));

  const GeometryConstants s = geometry_constants(Regularizer::smoothed_entropy(0.5, 1.0, 20));
  CHECK(s.steepness_L_psi == doctest::Approx(1.0 + std::log(1.5)));
  CHECK(s.set_diameter_D_X == doctest::Approx(std::sqrt(2.0)));
  // Strong convexity under |.|_1 on the smoothed simplex is 1 / (B + D eps).
  CHECK(s.strong_convexity_K == doctest::Approx(1.0 / 11.0));
}

TEST_CASE("entropy diameter term is the max minus min of psi over X") {
  for (long dim : {1L, 2L, 5L}) {
    const Regularizer reg = Regularizer::smoothed_entropy(0.5, 1.0, dim);
    const double d = geometry_constants(reg).diameter_term_D_psi;
    if (dim <= 2) {
      auto f = [](const Vector& x) { return oracle::entropy(x, 0.5); };
      auto lo = oracle::grid_minimize(f, {}, static_cast<int>(dim), 1.0);
      auto hi = oracle::grid_minimize([&](const Vector& x) { return -f(x); }, {},
                                      static_cast<int>(dim), 1.0);
      CHECK(d == doctest::Approx(-hi.value - lo.value).epsilon(1e-6));
    }
    // Vertex values bound the maximum; the minimum lies at the symmetric point.
    std::mt19937_64 gen(5);
    for (int k = 0; k < 2000; ++k) {
      const Vector x = sample_capped_simplex(dim, 1.0, gen);
      const double v = regularizer_value(x, reg);
      const double vmax = std::max(oracle::entropy(Vector::Zero(dim), 0.5),
                                   oracle::entropy(Vector::Unit(dim, 0), 0.5));
      CHECK(v <= vmax + 1e-12);
      CHECK(vmax - v <= d + 1e-12);
    }
  }
}

TEST_CASE("entropy strong convexity constant is not larger than the Bregman bound allows") {
  // x = (1/2, 1/2), p = (1/2 + delta, 1/2 - delta): the Bregman divergence is
  // about delta^2 while (K/2)|x - p|_1^2 = 2 K delta^2, so K = 1/B = 1 fails.
  const Regularizer reg = entropy2();
  const double delta = 1e-3;
  const Vector x = vec({0.5, 0.5});
  const Vector p = vec({0.5 + delta, 0.5 - delta});
  const double bregman = regularizer_value(p, reg) - regularizer_value(x, reg) -
                         regularizer_gradient(x, reg).dot(p - x);
  const double k = geometry_constants(reg).strong_convexity_K;
  CHECK(bregman < 0.5 * 1.0 * std::pow((p - x).lpNorm<1>(), 2));
  CHECK(bregman >= 0.5 * k * std::pow((p - x).lpNorm<1>(), 2));
}

TEST_CASE("regularizer validation") {
  CHECK_THROWS_AS(Regularizer::euclidean(1.0, 0), InvalidInputError);
  CHECK_THROWS_AS(Regularizer::smoothed_entropy(-1.0, 1.0, 2), InvalidInputError);
  CHECK_THROWS_AS(Regularizer::euclidean(0.0, 2), InvalidInputError);
  CHECK(regularizer_kind_from_string("entropy") == RegularizerKind::SmoothedEntropy);
  CHECK_THROWS_AS(regularizer_kind_from_string("l3"), ConfigError);
}

TEST_CASE("norm pairing") {
  const Vector v = vec({3, -4});
  CHECK(primal_norm(v, Regularizer::euclidean(1, 2)) == doctest::Approx(5.0));
  CHECK(dual_norm(v, Regularizer::euclidean(1, 2)) == doctest::Approx(5.0));
  CHECK(primal_norm(v, entropy2()) == doctest::Approx(7.0));
  CHECK(dual_norm(v, entropy2()) == doctest::Approx(4.0));
}
