#pragma once

#include <memory>

#include "gomsp/common.hpp"

namespace gomsp {

/// One revealed time slot of an online problem: the true loss f_t, the
/// learner's perturbed view f_hat_t, and the constraint map g_t.
class SlotProblem {
 public:
  virtual ~SlotProblem() = default;

  virtual Eigen::Index dimension() const = 0;
  virtual Eigen::Index num_constraints() const = 0;
  /// Cap of the feasible set { x >= 0 : sum x <= cap }.
  virtual double cap() const = 0;

  virtual double loss(const Vector& x) const = 0;
  virtual Vector loss_gradient(const Vector& x) const = 0;
  virtual double observed_loss(const Vector& x) const = 0;
  virtual Vector observed_loss_gradient(const Vector& x) const = 0;

  virtual Vector constraints(const Vector& x) const = 0;
  /// R x D, row r is grad g_t^r(x).
  virtual Matrix constraint_gradients(const Vector& x) const = 0;
};

/// A source of slots for one trajectory. Stateful systems (tracking) advance
/// on commit(); stateless ones ignore the played action.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual Eigen::Index dimension() const = 0;
  virtual Eigen::Index num_constraints() const = 0;
  virtual double cap() const = 0;

  virtual std::unique_ptr<SlotProblem> reveal(long slot) = 0;
  virtual void commit(const Vector& action) { (void)action; }
  /// True when revealed slots depend on previously committed actions.
  virtual bool depends_on_actions() const { return false; }
};

}  // namespace gomsp
