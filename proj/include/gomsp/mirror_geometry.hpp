#pragma once

#include "gomsp/common.hpp"

namespace gomsp {

// Feasible set throughout: X = { x >= 0 : sum_i x_i <= cap }.

enum class RegularizerKind { Euclidean, SmoothedEntropy };

const char* to_string(RegularizerKind kind);
RegularizerKind regularizer_kind_from_string(const std::string& name);

/// Description of a strongly convex regularizer psi on the capped simplex.
///
/// Euclidean:        psi(x) = |x|_2^2 / 2, paired with (|.|_2, |.|_2).
/// SmoothedEntropy:  psi(x) = sum_i (x_i + eps) ln(x_i + eps), paired with
///                   (|.|_1, |.|_inf).
struct Regularizer {
  RegularizerKind kind = RegularizerKind::Euclidean;
  double epsilon = 0.5;
  double cap = 1.0;
  Eigen::Index dimension = 1;

  static Regularizer euclidean(double cap, Eigen::Index dimension);
  static Regularizer smoothed_entropy(double epsilon, double cap, Eigen::Index dimension);

  /// Throws InvalidInputError on a structurally invalid description; warns
  /// when the entropy smoothing lies outside [1/e, 1].
  void validate() const;
};

struct GeometryConstants {
  double strong_convexity_K = 1.0;
  double steepness_L_psi = 0.0;
  double diameter_term_D_psi = 0.0;  // max_X psi - min_X psi
  double set_diameter_D_X = 0.0;     // under |.|_2
};

bool in_feasible_set(const Vector& x, double cap, double tol = 1e-9);

/// Euclidean projection onto the capped simplex.
Vector project_capped_simplex(const Vector& y, double cap);

/// Phi(y) = argmax_{x in X} <y, x> - psi(x).
Vector mirror_map(const Vector& y, const Regularizer& reg);

double regularizer_value(const Vector& x, const Regularizer& reg);
Vector regularizer_gradient(const Vector& x, const Regularizer& reg);

/// psi*(y) = <y, Phi(y)> - psi(Phi(y)).
double conjugate_value(const Vector& y, const Regularizer& reg);

/// F(p, y) = psi(p) + psi*(y) - <y, p>.
double fenchel_coupling(const Vector& p, const Vector& y, const Regularizer& reg);

GeometryConstants geometry_constants(const Regularizer& reg);

/// Norm on the primal space matched to the regularizer.
double primal_norm(const Vector& v, const Regularizer& reg);
/// Dual of primal_norm.
double dual_norm(const Vector& v, const Regularizer& reg);

}  // namespace gomsp
