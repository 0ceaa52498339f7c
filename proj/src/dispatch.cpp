#include "gomsp/dispatch.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "gomsp/mirror_geometry.hpp"

namespace gomsp {

namespace {

constexpr double kDomainTol = 1e-9;

void require_feasible(const Vector& x, const DispatchParams& params, const char* who) {
  if (x.size() != params.dim) {
    throw InvalidInputError(fmt::format("{}: expected dimension {}, got {}", who, params.dim, x.size()));
  }
  if (!in_feasible_set(x, params.cap, kDomainTol)) {
    throw DomainError(fmt::format("{}: point outside the feasible set", who));
  }
}

}  // namespace

void DispatchParams::validate() const {
  if (dim < 1 || num_constraints < 0) {
    throw ConfigError("dispatch: dimension must be >= 1 and constraint count >= 0");
  }
  if (!(cap > 0.0)) throw ConfigError("dispatch: cap must be positive");
  if (!(demand_penalty >= 0.0)) throw ConfigError("dispatch: demand penalty must be >= 0");
  if (!(sigma_a >= 0.0) || !(sigma_b >= 0.0)) {
    throw ConfigError("dispatch: observation noise levels must be >= 0");
  }
  if (curvature.rows() != num_constraints || curvature.cols() != dim ||
      slope.rows() != num_constraints || slope.cols() != dim) {
    throw ConfigError(fmt::format("dispatch: constraint matrices must be {}x{}", num_constraints, dim));
  }
  if ((num_constraints > 0) && (curvature.minCoeff() < 0.0 || slope.minCoeff() < 0.0)) {
    throw ConfigError("dispatch: constraint coefficients must be nonnegative");
  }
  if (!(perturbation_scale >= 0.0)) throw ConfigError("dispatch: perturbation scale must be >= 0");
}

DispatchParams make_dispatch_params(Eigen::Index dim, Eigen::Index num_constraints,
                                    const RngStreams& rng, std::uint64_t environment_index) {
  DispatchParams p;
  p.dim = dim;
  p.num_constraints = num_constraints;
  p.curvature.resize(num_constraints, dim);
  p.slope.resize(num_constraints, dim);
  auto gen = rng.generator(streams::kConstraintDraw, environment_index);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index j = 0; j < num_constraints; ++j) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      p.curvature(j, i) = unit(gen);
      p.slope(j, i) = unit(gen);
    }
  }
  return p;
}

RoundRealization dispatch_generate_round(const DispatchParams& params, const RngStreams& rng,
                                         long t, std::uint64_t environment_index,
                                         std::uint64_t noise_index) {
  const auto slot = static_cast<std::uint64_t>(t);
  const Eigen::Index dim = params.dim;
  const double scale = params.perturbation_scale;
  const double pi = std::numbers::pi;
  const double td = static_cast<double>(t);

  RoundRealization r;
  r.slot = t;
  r.true_a.resize(dim);
  r.true_b.resize(dim);

  auto coeff = rng.generator(streams::kCoefficientNoise, environment_index, slot);
  std::uniform_real_distribution<double> ua(0.0, 0.5);
  std::uniform_real_distribution<double> ub(0.0, 0.2);
  const double mean_a = 0.5 * std::sin(pi * td / 50.0) + 5.0;
  const double mean_b = 0.5 * std::sin(pi * td / 100.0) + 6.0;
  if (params.per_coordinate_draws) {
    for (Eigen::Index i = 0; i < dim; ++i) r.true_a[i] = mean_a + scale * ua(coeff);
    for (Eigen::Index i = 0; i < dim; ++i) r.true_b[i] = mean_b + scale * ub(coeff);
  } else {
    const double da = ua(coeff);
    const double db = ub(coeff);
    r.true_a.setConstant(mean_a + scale * da);
    r.true_b.setConstant(mean_b + scale * db);
  }

  auto demand = rng.generator(streams::kDemand, environment_index, slot);
  std::uniform_real_distribution<double> ud(0.0, 0.2);
  r.demand = 0.1 * std::cos(pi * td / 125.0) + 0.7 + scale * ud(demand);

  auto thresh = rng.generator(streams::kThresholds, environment_index, slot);
  std::uniform_real_distribution<double> ue(0.0, 1.0);
  const double mean_e = 0.05 * std::cos(pi * td / 50.0) + 0.2;
  r.thresholds.resize(params.num_constraints);
  if (params.per_constraint_thresholds) {
    for (Eigen::Index j = 0; j < params.num_constraints; ++j) {
      r.thresholds[j] = mean_e + scale * ue(thresh);
    }
  } else {
    r.thresholds.setConstant(mean_e + scale * ue(thresh));
  }

  auto obs = rng.generator(streams::kObservationNoise, noise_index, slot);
  std::normal_distribution<double> normal(0.0, 1.0);
  r.observed_a.resize(dim);
  r.observed_b.resize(dim);
  for (Eigen::Index i = 0; i < dim; ++i) r.observed_a[i] = r.true_a[i] + params.sigma_a * normal(obs);
  for (Eigen::Index i = 0; i < dim; ++i) r.observed_b[i] = r.true_b[i] + params.sigma_b * normal(obs);
  return r;
}

double dispatch_loss(const Vector& x, const RoundRealization& round, const DispatchParams& params,
                     bool use_observed) {
  require_feasible(x, params, "dispatch_loss");
  const Vector& a = use_observed ? round.observed_a : round.true_a;
  const Vector& b = use_observed ? round.observed_b : round.true_b;
  const double imbalance = x.sum() - round.demand;
  return a.dot(x.cwiseProduct(x)) + b.dot(x) + params.demand_penalty * imbalance * imbalance;
}

Vector dispatch_loss_gradient(const Vector& x, const RoundRealization& round,
                              const DispatchParams& params, bool use_observed) {
  require_feasible(x, params, "dispatch_loss_gradient");
  const Vector& a = use_observed ? round.observed_a : round.true_a;
  const Vector& b = use_observed ? round.observed_b : round.true_b;
  const double imbalance = x.sum() - round.demand;
  Vector g = 2.0 * a.cwiseProduct(x) + b;
  g.array() += 2.0 * params.demand_penalty * imbalance;
  return g;
}

Vector dispatch_constraints(const Vector& x, const RoundRealization& round,
                            const DispatchParams& params) {
  require_feasible(x, params, "dispatch_constraints");
  return params.curvature * x.cwiseProduct(x) + params.slope * x - round.thresholds;
}

Matrix dispatch_constraint_gradients(const Vector& x, const RoundRealization& round,
                                     const DispatchParams& params) {
  (void)round;
  require_feasible(x, params, "dispatch_constraint_gradients");
  Matrix jac = params.slope;
  jac += params.curvature * (2.0 * x).asDiagonal();
  return jac;
}

DispatchSlot::DispatchSlot(std::shared_ptr<const DispatchParams> params, RoundRealization round)
    : params_(std::move(params)), round_(std::move(round)) {}

double DispatchSlot::loss(const Vector& x) const { return dispatch_loss(x, round_, *params_, false); }
Vector DispatchSlot::loss_gradient(const Vector& x) const {
  return dispatch_loss_gradient(x, round_, *params_, false);
}
double DispatchSlot::observed_loss(const Vector& x) const {
  return dispatch_loss(x, round_, *params_, true);
}
Vector DispatchSlot::observed_loss_gradient(const Vector& x) const {
  return dispatch_loss_gradient(x, round_, *params_, true);
}
Vector DispatchSlot::constraints(const Vector& x) const {
  return dispatch_constraints(x, round_, *params_);
}
Matrix DispatchSlot::constraint_gradients(const Vector& x) const {
  return dispatch_constraint_gradients(x, round_, *params_);
}

DispatchEnvironment::DispatchEnvironment(std::shared_ptr<const DispatchParams> params,
                                         RngStreams rng, std::uint64_t environment_index,
                                         std::uint64_t noise_index)
    : params_(std::move(params)),
      rng_(rng),
      environment_index_(environment_index),
      noise_index_(noise_index) {}

std::unique_ptr<SlotProblem> DispatchEnvironment::reveal(long slot) { return reveal_dispatch(slot); }

std::unique_ptr<DispatchSlot> DispatchEnvironment::reveal_dispatch(long slot) const {
  return std::make_unique<DispatchSlot>(
      params_, dispatch_generate_round(*params_, rng_, slot, environment_index_, noise_index_));
}

}  // namespace gomsp
