#include "gomsp/tracking.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace gomsp {

namespace {

void check_shapes(const Vector& u, const Vector& x, const Vector& y, const TrackingParams& p) {
  if (u.size() != p.control_dim() || x.size() != p.state_dim() || y.size() != p.state_dim()) {
    throw InvalidInputError(fmt::format(
        "tracking: shape mismatch (u {}, x {}, y {}) for n={}, m={}", u.size(), x.size(), y.size(),
        p.state_dim(), p.control_dim()));
  }
}

}  // namespace

Vector TrackingParams::target(long t) const {
  Vector y = target_center;
  const double phase = 2.0 * std::numbers::pi * static_cast<double>(t) / target_period;
  if (y.size() >= 1) y[0] += target_radius * std::cos(phase);
  if (y.size() >= 2) y[1] += target_radius * std::sin(phase);
  return y;
}

void TrackingParams::validate() const {
  const Eigen::Index n = system_A.rows();
  const Eigen::Index m = input_B.cols();
  if (n < 1 || system_A.cols() != n || input_B.rows() != n || m < 1) {
    throw ConfigError("tracking: system matrices have inconsistent shapes");
  }
  if (u_min.size() != m || u_max.size() != m) {
    throw ConfigError("tracking: control bounds must have the control dimension");
  }
  if ((u_max - u_min).minCoeff() < 0.0) {
    throw ConfigError("tracking: u_min must not exceed u_max");
  }
  if (initial_state.size() != n || target_center.size() != n) {
    throw ConfigError("tracking: initial state and target center must have the state dimension");
  }
  if (!(smoothness_beta >= 0.0)) throw ConfigError("tracking: beta must be >= 0");
  if (!(energy_cap >= 0.0)) throw ConfigError("tracking: energy cap must be >= 0");
  if (!(cap > 0.0)) throw ConfigError("tracking: cap must be positive");
  if (!(target_period > 0.0)) throw ConfigError("tracking: target period must be positive");
  if (!(sigma_target >= 0.0)) throw ConfigError("tracking: target noise must be >= 0");
}

TrackingParams TrackingParams::planar_default() {
  TrackingParams p;
  const double angle = 0.05;
  p.system_A.resize(2, 2);
  p.system_A << 0.95 * std::cos(angle), -0.95 * std::sin(angle), 0.95 * std::sin(angle),
      0.95 * std::cos(angle);
  p.input_B = Matrix::Identity(2, 2);
  p.smoothness_beta = 0.5;
  p.energy_cap = 0.5;
  p.u_min = Vector::Zero(2);
  p.u_max = Vector::Constant(2, 0.6);
  p.cap = 1.0;
  p.initial_state = Vector::Zero(2);
  p.target_center = Vector::Constant(2, 2.0);
  p.target_radius = 1.0;
  p.target_period = 100.0;
  p.sigma_target = 0.1;
  return p;
}

double tracking_loss(const Vector& u, const Vector& state_x, const Vector& target_next,
                     const TrackingParams& params) {
  check_shapes(u, state_x, target_next, params);
  const Vector bu = params.input_B * u;
  const Vector miss = params.system_A * state_x + bu - target_next;
  const Vector move = params.system_A * state_x - state_x + bu;
  return miss.squaredNorm() + 0.5 * params.smoothness_beta * move.squaredNorm();
}

Vector tracking_loss_gradient(const Vector& u, const Vector& state_x, const Vector& target_next,
                              const TrackingParams& params) {
  check_shapes(u, state_x, target_next, params);
  const Matrix& A = params.system_A;
  const Matrix& B = params.input_B;
  const double beta = params.smoothness_beta;
  return 2.0 * B.transpose() * (A * state_x - target_next) +
         (2.0 + beta) * B.transpose() * (B * u) + beta * (B.transpose() * (A * state_x - state_x));
}

Vector tracking_constraints(const Vector& u, const TrackingParams& params) {
  const Eigen::Index m = params.control_dim();
  if (u.size() != m) throw InvalidInputError("tracking_constraints: control has the wrong dimension");
  Vector g(1 + 2 * m);
  g[0] = u.squaredNorm() - params.energy_cap;
  g.segment(1, m) = u - params.u_max;
  g.segment(1 + m, m) = params.u_min - u;
  return g;
}

Matrix tracking_constraint_gradients(const Vector& u, const TrackingParams& params) {
  const Eigen::Index m = params.control_dim();
  if (u.size() != m) {
    throw InvalidInputError("tracking_constraint_gradients: control has the wrong dimension");
  }
  Matrix jac = Matrix::Zero(1 + 2 * m, m);
  jac.row(0) = 2.0 * u.transpose();
  jac.block(1, 0, m, m) = Matrix::Identity(m, m);
  jac.block(1 + m, 0, m, m) = -Matrix::Identity(m, m);
  return jac;
}

TrackingSlot::TrackingSlot(std::shared_ptr<const TrackingParams> params, Vector state,
                           Vector target_next, Vector observed_target_next)
    : params_(std::move(params)),
      state_(std::move(state)),
      target_(std::move(target_next)),
      observed_target_(std::move(observed_target_next)) {}

double TrackingSlot::loss(const Vector& u) const { return tracking_loss(u, state_, target_, *params_); }
Vector TrackingSlot::loss_gradient(const Vector& u) const {
  return tracking_loss_gradient(u, state_, target_, *params_);
}
double TrackingSlot::observed_loss(const Vector& u) const {
  return tracking_loss(u, state_, observed_target_, *params_);
}
Vector TrackingSlot::observed_loss_gradient(const Vector& u) const {
  return tracking_loss_gradient(u, state_, observed_target_, *params_);
}
Vector TrackingSlot::constraints(const Vector& u) const { return tracking_constraints(u, *params_); }
Matrix TrackingSlot::constraint_gradients(const Vector& u) const {
  return tracking_constraint_gradients(u, *params_);
}

TrackingEnvironment::TrackingEnvironment(std::shared_ptr<const TrackingParams> params,
                                         RngStreams rng, std::uint64_t noise_index)
    : params_(std::move(params)), rng_(rng), noise_index_(noise_index), state_(params_->initial_state) {}

std::unique_ptr<SlotProblem> TrackingEnvironment::reveal(long slot) {
  Vector target = params_->target(slot + 1);
  Vector observed = target;
  if (params_->sigma_target > 0.0) {
    auto gen = rng_.generator(streams::kTarget, noise_index_, static_cast<std::uint64_t>(slot));
    std::normal_distribution<double> normal(0.0, params_->sigma_target);
    for (Eigen::Index i = 0; i < observed.size(); ++i) observed[i] += normal(gen);
  }
  return std::make_unique<TrackingSlot>(params_, state_, std::move(target), std::move(observed));
}

void TrackingEnvironment::commit(const Vector& action) {
  if (action.size() != params_->control_dim()) {
    throw InvalidInputError("tracking: committed action has the wrong dimension");
  }
  state_ = params_->system_A * state_ + params_->input_B * action;
}

}  // namespace gomsp
