#pragma once

#include "gomsp/common.hpp"
#include "gomsp/mirror_geometry.hpp"

namespace gomsp {

/// h(u) = [u]_+^p with p >= 1.
struct PenaltyTransform {
  double power = 1.0;

  void validate() const;
};

double penalty_apply(const PenaltyTransform& h, double u);
Vector penalty_apply(const PenaltyTransform& h, const Vector& u);

/// Gradient of h(g(x)) given g(x) and grad g(x). The active branch includes
/// g = 0, and 0^0 is taken as 1 so p = 1 returns grad g there.
Vector penalty_chain_gradient(const PenaltyTransform& h, double g_value, const Vector& g_grad);

struct GomspConfig {
  double gamma = 0.0;  // learning rate
  double alpha = 0.0;  // dual regularization
  Regularizer regularizer;
  PenaltyTransform penalty;
  Eigen::Index num_constraints = 0;

  /// gamma >= 0, alpha >= 0, alpha * gamma < 1, valid regularizer/penalty.
  void validate() const;
};

struct GomspState {
  Vector score;   // Y_t
  Vector primal;  // X_t = Phi(Y_t)
  Vector dual;    // Lambda_t >= 0
  long slot = 0;

  /// Y_1 given, X_1 = Phi(Y_1), Lambda_1 = 0.
  static GomspState initial(const Vector& score, const GomspConfig& cfg);
};

struct FirstOrderFeedback {
  Vector noisy_loss_grad;    // v_hat_t, length D
  Vector constraint_values;  // g_t(X_t), length R
  Matrix constraint_grads;   // R x D, rows grad g_t^r(X_t)

  void validate(Eigen::Index dim, Eigen::Index num_constraints) const;
};

Vector score_update(const GomspState& state, const FirstOrderFeedback& fb, const GomspConfig& cfg);
Vector dual_update(const GomspState& state, const Vector& h_values, const GomspConfig& cfg);

/// One slot of the method. Both the score and the dual consume the feedback
/// evaluated at the old primal X_t.
GomspState gomsp_step(const GomspState& state, const FirstOrderFeedback& fb, const GomspConfig& cfg);

/// alpha - gamma (alpha^2 - C1^2 / K) >= 0.
bool validate_step_condition(const GomspConfig& cfg, double c1, double strong_convexity_K);

}  // namespace gomsp
