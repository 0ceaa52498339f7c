#include "gomsp/baselines.hpp"

#include <fmt/format.h>

#include "gomsp/mirror_geometry.hpp"

namespace gomsp {

namespace {

void check_shapes(const Vector& primal, const Vector& dual, const SlotProblem& round,
                  const char* who) {
  if (primal.size() != round.dimension() || dual.size() != round.num_constraints()) {
    throw InvalidInputError(fmt::format("{}: state shape ({}, {}) does not match slot ({}, {})",
                                        who, primal.size(), dual.size(), round.dimension(),
                                        round.num_constraints()));
  }
}

void check_gamma(double gamma, const char* who) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw InvalidInputError(fmt::format("{}: step size must be >= 0, got {}", who, gamma));
  }
}

}  // namespace

SdgState SdgState::initial(Eigen::Index dim, Eigen::Index num_constraints) {
  return {Vector::Zero(dim), Vector::Zero(num_constraints), 0};
}

SdgState sdg_step(const SdgState& state, const SlotProblem& round, double gamma, double tol) {
  check_shapes(state.primal, state.dual, round, "sdg_step");
  check_gamma(gamma, "sdg_step");

  const Vector& lambda = state.dual;
  ObjectiveOracle lagrangian = [&](const Vector& x, Vector& grad) {
    grad = round.observed_loss_gradient(x);
    double value = round.observed_loss(x);
    if (lambda.size() > 0) {
      value += lambda.dot(round.constraints(x));
      grad.noalias() += round.constraint_gradients(x).transpose() * lambda;
    }
    return value;
  };
  InnerSolverOptions options;
  options.tolerance = tol;

  SdgState next;
  next.primal = inner_solve_convex(lagrangian, round.cap(), round.dimension(), options, state.primal).x;
  next.dual = (state.dual + gamma * round.constraints(state.primal)).cwiseMax(0.0);
  next.slot = state.slot + 1;
  return next;
}

MospState MospState::initial(Eigen::Index dim, Eigen::Index num_constraints) {
  return {Vector::Zero(dim), Vector::Zero(num_constraints), 0};
}

MospState mosp_step(const MospState& state, const SlotProblem& round, double gamma) {
  check_shapes(state.primal, state.dual, round, "mosp_step");
  check_gamma(gamma, "mosp_step");

  Vector direction = round.observed_loss_gradient(state.primal);
  if (state.dual.size() > 0) {
    direction.noalias() += round.constraint_gradients(state.primal).transpose() * state.dual;
  }
  MospState next;
  next.primal = project_capped_simplex(state.primal - gamma * direction, round.cap());
  next.dual = (state.dual + gamma * round.constraints(next.primal)).cwiseMax(0.0);
  next.slot = state.slot + 1;
  return next;
}

}  // namespace gomsp
