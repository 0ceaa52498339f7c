#pragma once

#include "gomsp/common.hpp"
#include "gomsp/inner_solver.hpp"
#include "gomsp/problem.hpp"

namespace gomsp {

// Comparison methods. Both face the same SlotProblem interface as GOMSP: the
// learner sees observed_loss / observed_loss_gradient and the true g_t.

/// Stochastic dual gradient:
///   X_{t+1} = argmin_X f_hat_t(x) + <Lambda_t, g_t(x)>
///   Lambda_{t+1} = [Lambda_t + gamma g_t(X_t)]_+
struct SdgState {
  Vector primal;
  Vector dual;
  long slot = 0;

  static SdgState initial(Eigen::Index dim, Eigen::Index num_constraints);
};

SdgState sdg_step(const SdgState& state, const SlotProblem& round, double gamma,
                  double tol = 1e-8);

/// Modified online saddle point, reconstructed as
///   x_{t+1} = Pi_X[x_t - gamma (v_hat_t + grad g_t(x_t)' lambda_t)]
///   lambda_{t+1} = [lambda_t + gamma g_t(x_{t+1})]_+
/// with a causal dual (g_t evaluated at the new primal) and one step size for
/// both updates.
struct MospState {
  Vector primal;
  Vector dual;
  long slot = 0;

  static MospState initial(Eigen::Index dim, Eigen::Index num_constraints);
};

MospState mosp_step(const MospState& state, const SlotProblem& round, double gamma);

}  // namespace gomsp
