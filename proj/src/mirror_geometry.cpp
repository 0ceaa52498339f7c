#include "gomsp/mirror_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <fmt/format.h>

namespace gomsp {

namespace {

constexpr double kFeasibilityTol = 1e-9;
constexpr double kEntropySumTol = 1e-10;
constexpr int kBisectionIterations = 200;

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw InvalidInputError(fmt::format("{}: non-finite input", what));
  }
}

void require_dimension(const Vector& v, const Regularizer& reg, const char* what) {
  if (v.size() != reg.dimension) {
    throw InvalidInputError(
        fmt::format("{}: expected dimension {}, got {}", what, reg.dimension, v.size()));
  }
}

double entropy_term(double x, double eps) { return (x + eps) * std::log(x + eps); }

// x(mu)_i = [exp(y_i - 1 - mu) - eps]_+
double entropy_sum(const Vector& y, double eps, double mu) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    s += std::max(std::exp(y[i] - 1.0 - mu) - eps, 0.0);
  }
  return s;
}

Vector entropy_point(const Vector& y, double eps, double mu) {
  Vector x(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    x[i] = std::max(std::exp(y[i] - 1.0 - mu) - eps, 0.0);
  }
  return x;
}

Vector entropy_mirror_map(const Vector& y, const Regularizer& reg) {
  const double eps = reg.epsilon;
  const double cap = reg.cap;
  if (entropy_sum(y, eps, 0.0) <= cap) {
    return entropy_point(y, eps, 0.0);
  }
  // At mu = hi every coordinate is at most cap / D, so the sum is <= cap.
  const double y_max = y.maxCoeff();
  double lo = 0.0;
  double hi = std::max(0.0, y_max - 1.0 - std::log(eps + cap / static_cast<double>(y.size())));
  for (int it = 0; it < kBisectionIterations; ++it) {
    const double s_hi = entropy_sum(y, eps, hi);
    if (cap - s_hi <= kEntropySumTol) {
      return entropy_point(y, eps, hi);
    }
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;
    }
    if (entropy_sum(y, eps, mid) > cap) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw NumericalError("mirror_map: bisection on the cap multiplier did not converge",
                       kBisectionIterations, entropy_point(y, eps, hi));
}

}  // namespace

const char* to_string(RegularizerKind kind) {
  switch (kind) {
    case RegularizerKind::Euclidean: return "euclidean";
    case RegularizerKind::SmoothedEntropy: return "entropy";
  }
  return "unknown";
}

RegularizerKind regularizer_kind_from_string(const std::string& name) {
  if (name == "euclidean") return RegularizerKind::Euclidean;
  if (name == "entropy" || name == "smoothed_entropy") return RegularizerKind::SmoothedEntropy;
  throw ConfigError(fmt::format("unknown regularizer '{}' (expected euclidean|entropy)", name));
}

Regularizer Regularizer::euclidean(double cap, Eigen::Index dimension) {
  Regularizer r;
  r.kind = RegularizerKind::Euclidean;
  r.cap = cap;
  r.dimension = dimension;
  r.validate();
  return r;
}

Regularizer Regularizer::smoothed_entropy(double epsilon, double cap, Eigen::Index dimension) {
  Regularizer r;
  r.kind = RegularizerKind::SmoothedEntropy;
  r.epsilon = epsilon;
  r.cap = cap;
  r.dimension = dimension;
  r.validate();
  return r;
}

void Regularizer::validate() const {
  if (!(cap > 0.0) || !std::isfinite(cap)) {
    throw InvalidInputError(fmt::format("regularizer: cap must be positive, got {}", cap));
  }
  if (dimension < 1) {
    throw InvalidInputError(fmt::format("regularizer: dimension must be >= 1, got {}", dimension));
  }
  if (kind == RegularizerKind::SmoothedEntropy) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw InvalidInputError(
          fmt::format("regularizer: entropy smoothing must be positive, got {}", epsilon));
    }
    if (epsilon < 1.0 / std::numbers::e || epsilon > 1.0) {
      warn(fmt::format("entropy smoothing {} outside [1/e, 1]; closed-form constants may not hold",
                       epsilon));
    }
  }
}

bool in_feasible_set(const Vector& x, double cap, double tol) {
  if (!x.allFinite()) return false;
  if (x.size() > 0 && x.minCoeff() < -tol) return false;
  return x.sum() <= cap + tol;
}

Vector project_capped_simplex(const Vector& y, double cap) {
  require_finite(y, "project_capped_simplex");
  if (!(cap > 0.0)) {
    throw InvalidInputError("project_capped_simplex: cap must be positive");
  }
  Vector x = y.cwiseMax(0.0);
  if (x.sum() <= cap) {
    return x;
  }
  // Projection onto { x >= 0 : sum x = cap } by sort and threshold.
  std::vector<double> u(y.data(), y.data() + y.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double prefix = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    prefix += u[j];
    const double candidate = (prefix - cap) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) {
      tau = candidate;
    }
  }
  return (y.array() - tau).cwiseMax(0.0).matrix();
}

Vector mirror_map(const Vector& y, const Regularizer& reg) {
  require_finite(y, "mirror_map");
  require_dimension(y, reg, "mirror_map");
  switch (reg.kind) {
    case RegularizerKind::Euclidean: return project_capped_simplex(y, reg.cap);
    case RegularizerKind::SmoothedEntropy: return entropy_mirror_map(y, reg);
  }
  throw InvalidInputError("mirror_map: unknown regularizer kind");
}

double regularizer_value(const Vector& x, const Regularizer& reg) {
  require_dimension(x, reg, "regularizer_value");
  if (!in_feasible_set(x, reg.cap, kFeasibilityTol)) {
    throw DomainError("regularizer_value: point outside the feasible set");
  }
  if (reg.kind == RegularizerKind::Euclidean) {
    return 0.5 * x.squaredNorm();
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    s += entropy_term(x[i], reg.epsilon);
  }
  return s;
}

Vector regularizer_gradient(const Vector& x, const Regularizer& reg) {
  require_dimension(x, reg, "regularizer_gradient");
  if (!in_feasible_set(x, reg.cap, kFeasibilityTol)) {
    throw DomainError("regularizer_gradient: point outside the feasible set");
  }
  if (reg.kind == RegularizerKind::Euclidean) {
    return x;
  }
  return ((x.array() + reg.epsilon).log() + 1.0).matrix();
}

double conjugate_value(const Vector& y, const Regularizer& reg) {
  const Vector x = mirror_map(y, reg);
  return y.dot(x) - regularizer_value(x, reg);
}

double fenchel_coupling(const Vector& p, const Vector& y, const Regularizer& reg) {
  require_dimension(p, reg, "fenchel_coupling");
  if (!in_feasible_set(p, reg.cap, kFeasibilityTol)) {
    throw DomainError("fenchel_coupling: point outside the feasible set");
  }
  return regularizer_value(p, reg) + conjugate_value(y, reg) - y.dot(p);
}

GeometryConstants geometry_constants(const Regularizer& reg) {
  reg.validate();
  GeometryConstants c;
  const double cap = reg.cap;
  const auto dim = static_cast<double>(reg.dimension);
  c.set_diameter_D_X = std::numbers::sqrt2 * cap;
  if (reg.kind == RegularizerKind::Euclidean) {
    c.strong_convexity_K = 1.0;
    c.steepness_L_psi = cap;
    c.diameter_term_D_psi = cap * cap;
    return c;
  }
  const double eps = reg.epsilon;
  // Hessian diag(1/(x_i+eps)) gives v'Hv >= |v|_1^2 / sum_i(x_i+eps) >= |v|_1^2 / (cap + D eps).
  c.strong_convexity_K = 1.0 / (cap + dim * eps);
  c.steepness_L_psi = std::max(std::abs(1.0 + std::log(eps)), std::abs(1.0 + std::log(cap + eps)));
  // psi is convex and separable: the max sits on a vertex (0 or cap e_i), the
  // min at the symmetric stationary point clipped into X.
  const double at_zero = dim * entropy_term(0.0, eps);
  const double at_vertex = entropy_term(cap, eps) + (dim - 1.0) * entropy_term(0.0, eps);
  const double stationary = std::min(std::max(1.0 / std::numbers::e - eps, 0.0), cap / dim);
  const double minimum = dim * entropy_term(stationary, eps);
  c.diameter_term_D_psi = std::max(at_zero, at_vertex) - minimum;
  return c;
}

double primal_norm(const Vector& v, const Regularizer& reg) {
  return reg.kind == RegularizerKind::Euclidean ? v.norm() : v.lpNorm<1>();
}

double dual_norm(const Vector& v, const Regularizer& reg) {
  return reg.kind == RegularizerKind::Euclidean ? v.norm() : v.lpNorm<Eigen::Infinity>();
}

}  // namespace gomsp
