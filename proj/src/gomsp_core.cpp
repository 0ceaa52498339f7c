#include "gomsp/gomsp_core.hpp"

#include <cassert>
#include <cmath>

#include <fmt/format.h>

namespace gomsp {

void PenaltyTransform::validate() const {
  if (!(power >= 1.0) || !std::isfinite(power)) {
    throw InvalidInputError(fmt::format("penalty transform: power must be >= 1, got {}", power));
  }
}

double penalty_apply(const PenaltyTransform& h, double u) {
  if (u <= 0.0) return 0.0;
  if (h.power == 1.0) return u;
  if (h.power == 2.0) return u * u;
  return std::pow(u, h.power);
}

Vector penalty_apply(const PenaltyTransform& h, const Vector& u) {
  Vector out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = penalty_apply(h, u[i]);
  return out;
}

Vector penalty_chain_gradient(const PenaltyTransform& h, double g_value, const Vector& g_grad) {
  if (g_value < 0.0) {
    return Vector::Zero(g_grad.size());
  }
  const double slope = h.power == 1.0 ? 1.0 : h.power * std::pow(g_value, h.power - 1.0);
  return slope * g_grad;
}

void GomspConfig::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw InvalidInputError(fmt::format("gomsp: learning rate must be >= 0, got {}", gamma));
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw InvalidInputError(fmt::format("gomsp: regularization must be >= 0, got {}", alpha));
  }
  if (!(alpha * gamma < 1.0)) {
    throw InvalidInputError(
        fmt::format("gomsp: alpha * gamma must be < 1, got {}", alpha * gamma));
  }
  if (num_constraints < 0) {
    throw InvalidInputError("gomsp: negative constraint count");
  }
  regularizer.validate();
  penalty.validate();
}

GomspState GomspState::initial(const Vector& score, const GomspConfig& cfg) {
  GomspState s;
  s.score = score;
  s.primal = mirror_map(score, cfg.regularizer);
  s.dual = Vector::Zero(cfg.num_constraints);
  s.slot = 0;
  return s;
}

void FirstOrderFeedback::validate(Eigen::Index dim, Eigen::Index num_constraints) const {
  if (noisy_loss_grad.size() != dim || constraint_values.size() != num_constraints ||
      constraint_grads.rows() != num_constraints ||
      (num_constraints > 0 && constraint_grads.cols() != dim)) {
    throw InvalidInputError(fmt::format(
        "feedback shape mismatch: grad {}, values {}, jacobian {}x{} for D={}, R={}",
        noisy_loss_grad.size(), constraint_values.size(), constraint_grads.rows(),
        constraint_grads.cols(), dim, num_constraints));
  }
  if (!noisy_loss_grad.allFinite() || !constraint_values.allFinite() || !constraint_grads.allFinite()) {
    throw InvalidInputError("feedback contains non-finite values");
  }
}

Vector score_update(const GomspState& state, const FirstOrderFeedback& fb, const GomspConfig& cfg) {
  const Eigen::Index dim = state.score.size();
  if (state.dual.size() != cfg.num_constraints) {
    throw InvalidInputError("score_update: dual length does not match the constraint count");
  }
  fb.validate(dim, cfg.num_constraints);
  Vector direction = fb.noisy_loss_grad;
  for (Eigen::Index r = 0; r < cfg.num_constraints; ++r) {
    if (state.dual[r] == 0.0) continue;
    direction += state.dual[r] *
                 penalty_chain_gradient(cfg.penalty, fb.constraint_values[r],
                                        fb.constraint_grads.row(r).transpose());
  }
  return state.score - cfg.gamma * direction;
}

Vector dual_update(const GomspState& state, const Vector& h_values, const GomspConfig& cfg) {
  if (h_values.size() != state.dual.size()) {
    throw InvalidInputError("dual_update: penalty values length does not match the dual");
  }
  if (h_values.size() > 0 && h_values.minCoeff() < 0.0) {
    throw InvalidInputError("dual_update: penalty values must be nonnegative");
  }
  const Vector raw = (1.0 - cfg.alpha * cfg.gamma) * state.dual + cfg.gamma * h_values;
  assert(raw.size() == 0 || raw.minCoeff() >= 0.0);
  return raw.cwiseMax(0.0);
}

GomspState gomsp_step(const GomspState& state, const FirstOrderFeedback& fb, const GomspConfig& cfg) {
  GomspState next;
  next.score = score_update(state, fb, cfg);
  next.dual = dual_update(state, penalty_apply(cfg.penalty, fb.constraint_values), cfg);
  next.primal = mirror_map(next.score, cfg.regularizer);
  next.slot = state.slot + 1;
  return next;
}

bool validate_step_condition(const GomspConfig& cfg, double c1, double strong_convexity_K) {
  return cfg.alpha - cfg.gamma * (cfg.alpha * cfg.alpha - c1 * c1 / strong_convexity_K) >= 0.0;
}

}  // namespace gomsp
