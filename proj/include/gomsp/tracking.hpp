#pragma once

#include <memory>

#include "gomsp/common.hpp"
#include "gomsp/problem.hpp"
#include "gomsp/rng.hpp"

namespace gomsp {

/// Trajectory tracking for x_{t+1} = A x_t + B u_t:
///
///   f_t(u) = |A x_t + B u - y_{t+1}|^2 + (beta/2) |(A - I) x_t + B u|^2
///
/// The control lives in { u >= 0 : sum u <= cap }. The energy limit
/// |u|^2 <= energy_cap and the box u_min <= u <= u_max enter as constraints
/// g = (|u|^2 - energy_cap, u - u_max, u_min - u), so R = 1 + 2m.
///
/// The target moves on a circle in the first two state coordinates:
///   y_t = center + radius (cos(2 pi t / period), sin(2 pi t / period), 0, ...)
struct TrackingParams {
  Matrix system_A;   // n x n
  Matrix input_B;    // n x m
  double smoothness_beta = 0.5;
  double energy_cap = 1.0;
  Vector u_min;      // m
  Vector u_max;      // m
  double cap = 2.0;
  Vector initial_state;  // n
  Vector target_center;  // n
  double target_radius = 1.0;
  double target_period = 100.0;
  double sigma_target = 0.0;  // observation noise on y_{t+1}

  Eigen::Index state_dim() const { return system_A.rows(); }
  Eigen::Index control_dim() const { return input_B.cols(); }
  Eigen::Index num_constraints() const { return 1 + 2 * control_dim(); }

  Vector target(long t) const;
  void validate() const;

  /// A 2-D rotating system driven directly by a 2-D control.
  static TrackingParams planar_default();
};

double tracking_loss(const Vector& u, const Vector& state_x, const Vector& target_next,
                     const TrackingParams& params);
Vector tracking_loss_gradient(const Vector& u, const Vector& state_x, const Vector& target_next,
                              const TrackingParams& params);
Vector tracking_constraints(const Vector& u, const TrackingParams& params);
Matrix tracking_constraint_gradients(const Vector& u, const TrackingParams& params);

class TrackingSlot final : public SlotProblem {
 public:
  TrackingSlot(std::shared_ptr<const TrackingParams> params, Vector state, Vector target_next,
               Vector observed_target_next);

  Eigen::Index dimension() const override { return params_->control_dim(); }
  Eigen::Index num_constraints() const override { return params_->num_constraints(); }
  double cap() const override { return params_->cap; }

  double loss(const Vector& u) const override;
  Vector loss_gradient(const Vector& u) const override;
  double observed_loss(const Vector& u) const override;
  Vector observed_loss_gradient(const Vector& u) const override;
  Vector constraints(const Vector& u) const override;
  Matrix constraint_gradients(const Vector& u) const override;

 private:
  std::shared_ptr<const TrackingParams> params_;
  Vector state_;
  Vector target_;
  Vector observed_target_;
};

class TrackingEnvironment final : public Environment {
 public:
  TrackingEnvironment(std::shared_ptr<const TrackingParams> params, RngStreams rng,
                      std::uint64_t noise_index);

  Eigen::Index dimension() const override { return params_->control_dim(); }
  Eigen::Index num_constraints() const override { return params_->num_constraints(); }
  double cap() const override { return params_->cap; }

  std::unique_ptr<SlotProblem> reveal(long slot) override;
  void commit(const Vector& action) override;
  bool depends_on_actions() const override { return true; }

  const Vector& state() const noexcept { return state_; }

 private:
  std::shared_ptr<const TrackingParams> params_;
  RngStreams rng_;
  std::uint64_t noise_index_;
  Vector state_;
};

}  // namespace gomsp
