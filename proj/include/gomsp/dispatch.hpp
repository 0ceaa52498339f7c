#pragma once

#include <memory>

#include "gomsp/common.hpp"
#include "gomsp/problem.hpp"
#include "gomsp/rng.hpp"

namespace gomsp {

/// Economic dispatch with D generators, R externality constraints and total
/// output capped at `cap`.
///
///   f_t(x) = sum_i (a_t^i x_i^2 + b_t^i x_i) + xi (sum_i x_i - d_t)^2
///   g_t^j(x) = sum_i (c^{ij} x_i^2 + e^{ij} x_i) - E_t^{max,j}
struct DispatchParams {
  Eigen::Index dim = 20;
  Eigen::Index num_constraints = 10;
  double cap = 1.0;
  double demand_penalty = 20.0;  // xi
  double sigma_a = 0.2;
  double sigma_b = 1.0;
  Matrix curvature;  // R x D, c^{i->j} stored at (j, i)
  Matrix slope;      // R x D, e^{i->j} stored at (j, i)
  /// Draw the coefficient perturbations per generator instead of once per slot.
  bool per_coordinate_draws = false;
  /// Draw the threshold perturbation per constraint instead of once per slot.
  bool per_constraint_thresholds = false;
  /// Multiplies every uniform perturbation; 0 gives the noiseless means.
  double perturbation_scale = 1.0;

  void validate() const;
};

/// Fills curvature and slope with U[0,1] entries from the constraint-draw
/// stream of `environment_index`.
DispatchParams make_dispatch_params(Eigen::Index dim, Eigen::Index num_constraints,
                                    const RngStreams& rng, std::uint64_t environment_index = 0);

struct RoundRealization {
  long slot = 0;
  Vector true_a;
  Vector true_b;
  Vector observed_a;
  Vector observed_b;
  double demand = 0.0;
  Vector thresholds;  // E_t^{max,j}
};

/// Environment draws keyed by `environment_index`; the learner's observation
/// noise keyed by `noise_index`.
RoundRealization dispatch_generate_round(const DispatchParams& params, const RngStreams& rng,
                                         long t, std::uint64_t environment_index = 0,
                                         std::uint64_t noise_index = 0);

double dispatch_loss(const Vector& x, const RoundRealization& round, const DispatchParams& params,
                     bool use_observed = false);
Vector dispatch_loss_gradient(const Vector& x, const RoundRealization& round,
                              const DispatchParams& params, bool use_observed = false);
Vector dispatch_constraints(const Vector& x, const RoundRealization& round,
                            const DispatchParams& params);
Matrix dispatch_constraint_gradients(const Vector& x, const RoundRealization& round,
                                     const DispatchParams& params);

class DispatchSlot final : public SlotProblem {
 public:
  DispatchSlot(std::shared_ptr<const DispatchParams> params, RoundRealization round);

  Eigen::Index dimension() const override { return params_->dim; }
  Eigen::Index num_constraints() const override { return params_->num_constraints; }
  double cap() const override { return params_->cap; }

  double loss(const Vector& x) const override;
  Vector loss_gradient(const Vector& x) const override;
  double observed_loss(const Vector& x) const override;
  Vector observed_loss_gradient(const Vector& x) const override;
  Vector constraints(const Vector& x) const override;
  Matrix constraint_gradients(const Vector& x) const override;

  const RoundRealization& round() const noexcept { return round_; }
  const DispatchParams& params() const noexcept { return *params_; }

 private:
  std::shared_ptr<const DispatchParams> params_;
  RoundRealization round_;
};

class DispatchEnvironment final : public Environment {
 public:
  DispatchEnvironment(std::shared_ptr<const DispatchParams> params, RngStreams rng,
                      std::uint64_t environment_index, std::uint64_t noise_index);

  Eigen::Index dimension() const override { return params_->dim; }
  Eigen::Index num_constraints() const override { return params_->num_constraints; }
  double cap() const override { return params_->cap; }

  std::unique_ptr<SlotProblem> reveal(long slot) override;
  std::unique_ptr<DispatchSlot> reveal_dispatch(long slot) const;

 private:
  std::shared_ptr<const DispatchParams> params_;
  RngStreams rng_;
  std::uint64_t environment_index_;
  std::uint64_t noise_index_;
};

}  // namespace gomsp
