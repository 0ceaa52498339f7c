#pragma once

#include <functional>
#include <optional>

#include "gomsp/common.hpp"

namespace gomsp {

/// Returns F(x) and writes grad F(x) into the second argument.
using ObjectiveOracle = std::function<double(const Vector& x, Vector& grad)>;

struct InnerSolverOptions {
  double tolerance = 1e-8;
  long max_iterations = 100000;
  double armijo = 1e-4;
};

struct InnerSolveResult {
  Vector x;
  double value = 0.0;
  long iterations = 0;
  double projected_gradient_norm = 0.0;
};

/// Projected gradient descent over the capped simplex with a halving
/// backtracking line search. Stops once |x - Pi(x - grad F(x))|_2 <= tolerance.
/// Throws NumericalError (best iterate attached) when the iteration cap is hit.
InnerSolveResult inner_solve_convex(const ObjectiveOracle& objective, double cap, Eigen::Index dim,
                                    const InnerSolverOptions& options = {},
                                    const std::optional<Vector>& start = std::nullopt);

}  // namespace gomsp
