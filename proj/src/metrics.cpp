#include "gomsp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "gomsp/inner_solver.hpp"

namespace gomsp {

Benchmark per_slot_optimum(const SlotProblem& slot, const BenchmarkOptions& options,
                           const std::optional<Vector>& start) {
  const Eigen::Index dim = slot.dimension();
  const Eigen::Index rows = slot.num_constraints();
  InnerSolverOptions inner;
  inner.tolerance = options.tolerance;

  if (rows == 0) {
    ObjectiveOracle f = [&](const Vector& x, Vector& grad) {
      grad = slot.loss_gradient(x);
      return slot.loss(x);
    };
    Benchmark b;
    b.x_star = inner_solve_convex(f, slot.cap(), dim, inner, start).x;
    b.f_star = slot.loss(b.x_star);
    return b;
  }

  Vector lambda = Vector::Zero(rows);
  double rho = options.initial_penalty;
  Vector x = start ? *start : Vector::Zero(dim);
  double best_violation = std::numeric_limits<double>::infinity();
  double previous_violation = std::numeric_limits<double>::infinity();
  int stalled_doublings = 0;

  for (int outer = 1; outer <= options.max_outer_iterations; ++outer) {
    ObjectiveOracle augmented = [&](const Vector& z, Vector& grad) {
      const Vector g = slot.constraints(z);
      const Vector shifted = (lambda + rho * g).cwiseMax(0.0);
      grad = slot.loss_gradient(z);
      grad.noalias() += slot.constraint_gradients(z).transpose() * shifted;
      return slot.loss(z) + (shifted.squaredNorm() - lambda.squaredNorm()) / (2.0 * rho);
    };
    x = inner_solve_convex(augmented, slot.cap(), dim, inner, x).x;

    const Vector g = slot.constraints(x);
    const double violation = std::max(g.maxCoeff(), 0.0);
    // |lambda_new - lambda| / rho: zero exactly at a KKT point of the slot problem.
    const double complementarity = g.cwiseMax(-lambda / rho).lpNorm<Eigen::Infinity>();
    lambda = (lambda + rho * g).cwiseMax(0.0);

    if (violation <= options.violation_tolerance &&
        complementarity <= options.violation_tolerance) {
      return {x, slot.loss(x), outer};
    }

    if (violation < best_violation * (1.0 - 1e-12)) {
      best_violation = violation;
      stalled_doublings = 0;
    }
    if (violation > 0.25 * previous_violation) {
      rho *= 2.0;
      if (violation >= best_violation) {
        if (++stalled_doublings >= options.max_doublings) {
          throw InfeasibleSlotError(fmt::format(
              "per_slot_optimum: violation {:.3e} not shrinking after {} penalty doublings",
              violation, options.max_doublings));
        }
      }
    }
    previous_violation = violation;
  }
  throw NumericalError(fmt::format("per_slot_optimum: no KKT point after {} outer iterations",
                                   options.max_outer_iterations),
                       options.max_outer_iterations, x);
}

MetricsRecord MetricsRecord::empty(Eigen::Index num_constraints) {
  MetricsRecord rec;
  rec.hcfit = Vector::Zero(num_constraints);
  rec.queue = Vector::Zero(num_constraints);
  return rec;
}

Vector queue_update(const Vector& queue, const Vector& g_values) {
  if (queue.size() != g_values.size()) {
    throw InvalidInputError("queue_update: length mismatch");
  }
  return (queue + g_values).cwiseMax(0.0);
}

MetricsRecord update_metrics(const MetricsRecord& rec, const Vector& played, const SlotProblem& slot,
                             const PenaltyTransform& h, const BenchmarkOptions& options) {
  return update_metrics(rec, played, slot, h, per_slot_optimum(slot, options));
}

MetricsRecord update_metrics(const MetricsRecord& rec, const Vector& played, const SlotProblem& slot,
                             const PenaltyTransform& h, const Benchmark& benchmark) {
  if (rec.hcfit.size() != slot.num_constraints() || rec.queue.size() != slot.num_constraints()) {
    throw InvalidInputError("update_metrics: record does not match the constraint count");
  }
  MetricsRecord next = rec;
  const Vector grad_played = slot.loss_gradient(played);
  const Vector g = slot.constraints(played);

  next.cum_dynamic_regret += slot.loss(played) - benchmark.f_star;
  next.cum_gap += (played - benchmark.x_star).dot(grad_played);
  next.hcfit += penalty_apply(h, g);
  next.cum_clipped_violation += g.cwiseMax(0.0).sum();
  next.queue = queue_update(rec.queue, g);
  next.slots_counted += 1;

  const double lipschitz =
      std::max(grad_played.norm(), slot.loss_gradient(benchmark.x_star).norm());
  next.cum_regret_lower_bound -= std::numbers::sqrt2 * slot.cap() * lipschitz;
  if (rec.last_benchmark) {
    next.path_variation_l2 += (benchmark.x_star - *rec.last_benchmark).norm();
    next.path_variation_l1 += (benchmark.x_star - *rec.last_benchmark).lpNorm<1>();
  }
  next.last_benchmark = benchmark.x_star;
  return next;
}

TimeAverages time_averages(const MetricsRecord& rec, Eigen::Index num_constraints) {
  if (rec.slots_counted < 1) {
    throw EmptyRecordError("time_averages: no slots recorded");
  }
  const auto t = static_cast<double>(rec.slots_counted);
  TimeAverages avg;
  avg.tadr = rec.cum_dynamic_regret / t;
  if (num_constraints > 0) {
    const auto tr = t * static_cast<double>(num_constraints);
    avg.taccv = rec.cum_clipped_violation / tr;
    avg.taql = rec.queue.sum() / tr;
  }
  avg.hcfit_avg = rec.hcfit / t;
  return avg;
}

PercentileBands aggregate_percentiles(const std::vector<std::vector<double>>& series,
                                      const std::vector<double>& levels) {
  if (series.empty() || series.front().empty()) {
    throw EmptyRecordError("aggregate_percentiles: empty input");
  }
  const std::size_t samples = series.size();
  const std::size_t slots = series.front().size();
  for (const auto& s : series) {
    if (s.size() != slots) throw InvalidInputError("aggregate_percentiles: ragged series");
  }
  PercentileBands out;
  out.levels = levels;
  out.mean.assign(slots, 0.0);
  out.band.assign(levels.size(), std::vector<double>(slots, 0.0));

  std::vector<std::size_t> ranks;
  for (double p : levels) {
    if (!(p > 0.0 && p <= 100.0)) {
      throw InvalidInputError(fmt::format("aggregate_percentiles: level {} outside (0, 100]", p));
    }
    const double raw = std::ceil(p * static_cast<double>(samples) / 100.0 - 1e-9);
    ranks.push_back(std::clamp<std::size_t>(static_cast<std::size_t>(raw), 1, samples));
  }

  std::vector<double> column(samples);
  for (std::size_t t = 0; t < slots; ++t) {
    double sum = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      column[s] = series[s][t];
      sum += column[s];
    }
    out.mean[t] = sum / static_cast<double>(samples);
    std::sort(column.begin(), column.end());
    for (std::size_t k = 0; k < ranks.size(); ++k) {
      out.band[k][t] = column[ranks[k] - 1];
    }
  }
  return out;
}

}  // namespace gomsp
