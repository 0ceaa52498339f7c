#pragma once

#include <functional>
#include <memory>
#include <random>

#include "gomsp/common.hpp"
#include "gomsp/gomsp_core.hpp"
#include "gomsp/mirror_geometry.hpp"
#include "gomsp/problem.hpp"

namespace gomsp {

/// Produces the slot problem for time t.
using SlotSampler = std::function<std::unique_ptr<SlotProblem>(long t)>;

/// Monte-Carlo lower estimates of the problem constants, all under the
/// regularizer's dual norm:
///   C1 ~ sup |grad(h o g)(x)' lambda|_* / |lambda|_2 over lambda >= 0
///   C2 ~ sup |grad f_t(x)|_*   (reported again as L_f)
///   C3 ~ sup |h(g_t(x))|_2
struct ConstantsEstimate {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double loss_lipschitz = 0.0;
  int sample_count = 0;
  long evaluations = 0;
};

/// Samples sample_count slots uniformly from [slot_begin, slot_end]; for each
/// one evaluates a uniform random point of X and every vertex of X.
ConstantsEstimate estimate_constants(const SlotSampler& sampler, const Regularizer& reg,
                                     const PenaltyTransform& h, long slot_begin, long slot_end,
                                     int sample_count, std::mt19937_64& rng);

/// Uniform draw from { x >= 0 : sum x <= cap }.
Vector sample_capped_simplex(Eigen::Index dim, double cap, std::mt19937_64& rng);

}  // namespace gomsp
