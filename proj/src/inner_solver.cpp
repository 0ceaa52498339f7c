#include "gomsp/inner_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "gomsp/mirror_geometry.hpp"

namespace gomsp {

namespace {
constexpr int kMaxHalvings = 80;
constexpr double kMaxStep = 1e8;
// Slack on the sufficient-decrease test so that rounding noise in F does not
// stall the line search next to the optimum.
constexpr double kRoundoffSlack = 16.0 * std::numeric_limits<double>::epsilon();
}  // namespace

InnerSolveResult inner_solve_convex(const ObjectiveOracle& objective, double cap, Eigen::Index dim,
                                    const InnerSolverOptions& options,
                                    const std::optional<Vector>& start) {
  if (!(options.tolerance > 0.0)) {
    throw InvalidInputError("inner_solve_convex: tolerance must be positive");
  }
  if (dim < 1) {
    throw InvalidInputError("inner_solve_convex: dimension must be >= 1");
  }
  Vector x = start ? project_capped_simplex(*start, cap) : Vector::Zero(dim);
  if (x.size() != dim) {
    throw InvalidInputError("inner_solve_convex: start point has the wrong dimension");
  }

  Vector grad(dim);
  double fx = objective(x, grad);
  double step = 1.0;
  Vector best = x;
  double best_pg = std::numeric_limits<double>::infinity();
  Vector trial_grad(dim);

  for (long it = 0; it < options.max_iterations; ++it) {
    if (!std::isfinite(fx) || !grad.allFinite()) {
      throw NumericalError("inner_solve_convex: objective returned a non-finite value", it, best);
    }
    const double pg = (x - project_capped_simplex(x - grad, cap)).norm();
    if (pg < best_pg) {
      best_pg = pg;
      best = x;
    }
    if (pg <= options.tolerance) {
      return {x, fx, it, pg};
    }

    bool accepted = false;
    for (int k = 0; k < kMaxHalvings; ++k) {
      Vector trial = project_capped_simplex(x - step * grad, cap);
      const double f_trial = objective(trial, trial_grad);
      const Vector dx = trial - x;
      const double decrease = grad.dot(dx);
      const double dx2 = dx.squaredNorm();
      const double curvature = (trial_grad - grad).dot(dx);
      bool ok = std::isfinite(f_trial) && f_trial <= fx + options.armijo * decrease;
      // Near the optimum the decrease drops below the rounding noise of F;
      // there the step is accepted when it does not exceed the inverse of the
      // local curvature along dx, which guarantees descent for a convex F.
      if (!ok && std::isfinite(f_trial) &&
          std::abs(f_trial - fx) <= kRoundoffSlack * (std::abs(fx) + 1.0)) {
        ok = decrease < 0.0 && step * curvature <= dx2;
      }
      if (ok) {
        x = std::move(trial);
        fx = f_trial;
        // Barzilai-Borwein guess for the next trial step.
        step = curvature > 0.0 ? std::clamp(dx2 / curvature, 1e-12, kMaxStep)
                               : std::min(2.0 * step, kMaxStep);
        grad = trial_grad;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      throw NumericalError(
          fmt::format("inner_solve_convex: line search failed (projected gradient {:.3e})", best_pg),
          it, best);
    }
  }
  throw NumericalError(
      fmt::format("inner_solve_convex: iteration cap {} reached (projected gradient {:.3e})",
                  options.max_iterations, best_pg),
      options.max_iterations, best);
}

}  // namespace gomsp
