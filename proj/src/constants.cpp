#include "gomsp/constants.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace gomsp {

namespace {

constexpr int kDualDirections = 4;

void accumulate(const SlotProblem& slot, const Vector& x, const Regularizer& reg,
                const PenaltyTransform& h, std::mt19937_64& rng, ConstantsEstimate& est) {
  ++est.evaluations;
  est.c2 = std::max(est.c2, dual_norm(slot.loss_gradient(x), reg));

  const Eigen::Index rows = slot.num_constraints();
  if (rows == 0) return;
  const Vector g = slot.constraints(x);
  const Matrix jac = slot.constraint_gradients(x);
  est.c3 = std::max(est.c3, penalty_apply(h, g).norm());

  Matrix chain(rows, x.size());
  for (Eigen::Index r = 0; r < rows; ++r) {
    chain.row(r) = penalty_chain_gradient(h, g[r], jac.row(r).transpose()).transpose();
  }
  // Coordinate directions first, then random directions in the positive orthant.
  for (Eigen::Index r = 0; r < rows; ++r) {
    est.c1 = std::max(est.c1, dual_norm(chain.row(r).transpose(), reg));
  }
  std::exponential_distribution<double> expo(1.0);
  for (int k = 0; k < kDualDirections; ++k) {
    Vector lambda(rows);
    for (Eigen::Index r = 0; r < rows; ++r) lambda[r] = expo(rng);
    lambda /= lambda.norm();
    est.c1 = std::max(est.c1, dual_norm(chain.transpose() * lambda, reg));
  }
}

}  // namespace

Vector sample_capped_simplex(Eigen::Index dim, double cap, std::mt19937_64& rng) {
  // The first dim coordinates of a uniform point on the (dim+1)-simplex.
  std::exponential_distribution<double> expo(1.0);
  Vector w(dim + 1);
  for (Eigen::Index i = 0; i <= dim; ++i) w[i] = expo(rng);
  return cap * w.head(dim) / w.sum();
}

ConstantsEstimate estimate_constants(const SlotSampler& sampler, const Regularizer& reg,
                                     const PenaltyTransform& h, long slot_begin, long slot_end,
                                     int sample_count, std::mt19937_64& rng) {
  if (sample_count < 1) {
    throw InvalidInputError("estimate_constants: sample_count must be >= 1");
  }
  if (slot_end < slot_begin) {
    throw InvalidInputError("estimate_constants: empty slot range");
  }
  ConstantsEstimate est;
  est.sample_count = sample_count;
  std::uniform_int_distribution<long> pick_slot(slot_begin, slot_end);
  const Eigen::Index dim = reg.dimension;
  for (int s = 0; s < sample_count; ++s) {
    const auto slot = sampler(pick_slot(rng));
    if (slot->dimension() != dim) {
      throw InvalidInputError(fmt::format("estimate_constants: slot dimension {} != regularizer {}",
                                          slot->dimension(), dim));
    }
    accumulate(*slot, sample_capped_simplex(dim, reg.cap, rng), reg, h, rng, est);
    accumulate(*slot, Vector::Zero(dim), reg, h, rng, est);
    for (Eigen::Index i = 0; i < dim; ++i) {
      accumulate(*slot, reg.cap * Vector::Unit(dim, i), reg, h, rng, est);
    }
  }
  est.loss_lipschitz = est.c2;
  return est;
}

}  // namespace gomsp
