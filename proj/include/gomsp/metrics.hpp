#pragma once

#include <optional>
#include <vector>

#include "gomsp/common.hpp"
#include "gomsp/gomsp_core.hpp"
#include "gomsp/problem.hpp"

namespace gomsp {

/// Per-slot constrained benchmark x*_t in argmin_{x in X, g_t(x) <= 0} f_t(x).
struct Benchmark {
  Vector x_star;
  double f_star = 0.0;
  int outer_iterations = 0;
};

struct BenchmarkOptions {
  double tolerance = 1e-8;            // inner projected-gradient tolerance
  double violation_tolerance = 1e-8;  // max_j g_j(x*) allowed
  double initial_penalty = 10.0;
  int max_doublings = 30;
  int max_outer_iterations = 500;
};

/// Augmented-Lagrangian method on the true loss, each subproblem solved by
/// inner_solve_convex. Throws InfeasibleSlotError when the violation stops
/// shrinking across max_doublings penalty doublings.
Benchmark per_slot_optimum(const SlotProblem& slot, const BenchmarkOptions& options = {},
                           const std::optional<Vector>& start = std::nullopt);

struct MetricsRecord {
  double cum_dynamic_regret = 0.0;
  double cum_gap = 0.0;
  Vector hcfit;  // per constraint, sum_t h(g_t^r(X_t))
  double cum_clipped_violation = 0.0;
  Vector queue;  // Q_t
  long slots_counted = 0;

  // Diagnostics.
  double cum_regret_lower_bound = 0.0;  // -D_X sum_t L_t
  double path_variation_l2 = 0.0;
  double path_variation_l1 = 0.0;
  std::optional<Vector> last_benchmark;

  static MetricsRecord empty(Eigen::Index num_constraints);
};

Vector queue_update(const Vector& queue, const Vector& g_values);

/// Adds one slot. The benchmark is computed here.
MetricsRecord update_metrics(const MetricsRecord& rec, const Vector& played, const SlotProblem& slot,
                             const PenaltyTransform& h, const BenchmarkOptions& options = {});
/// Adds one slot against a precomputed benchmark for the same slot.
MetricsRecord update_metrics(const MetricsRecord& rec, const Vector& played, const SlotProblem& slot,
                             const PenaltyTransform& h, const Benchmark& benchmark);

struct TimeAverages {
  double tadr = 0.0;
  double taccv = 0.0;
  double taql = 0.0;
  Vector hcfit_avg;
};

TimeAverages time_averages(const MetricsRecord& rec, Eigen::Index num_constraints);

struct PercentileBands {
  std::vector<double> levels;
  std::vector<double> mean;               // per slot
  std::vector<std::vector<double>> band;  // band[level][slot]
};

/// series[s][t]: metric of sample s at slot t. Nearest-rank percentiles,
/// rank = ceil(p / 100 * S).
PercentileBands aggregate_percentiles(const std::vector<std::vector<double>>& series,
                                      const std::vector<double>& levels);

}  // namespace gomsp
