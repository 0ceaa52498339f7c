#pragma once

#include <string>
#include <vector>

#include "gomsp/experiment_config.hpp"

namespace gomsp {

enum class VerificationSuite { Geometry, Gradients, Lemma1, Sublinearity };

const char* to_string(VerificationSuite suite);
VerificationSuite verification_suite_from_string(const std::string& name);

struct CheckResult {
  std::string name;
  bool passed = true;
  /// Smallest slack observed (tolerance already added); negative means failure.
  double margin = 0.0;
  long cases = 0;
  std::string detail;
};

struct VerificationReport {
  std::string suite;
  std::vector<CheckResult> checks;
  double seconds = 0.0;

  bool passed() const;
  std::string format() const;
};

struct GeometryOptions {
  std::vector<long> dimensions = {2, 5, 20};
  long cases = 10000;
  double tolerance = 1e-8;
  std::uint64_t seed = 11;
};

struct GradientOptions {
  long points = 100;
  double step = 1e-6;
  double tolerance = 1e-5;
  std::uint64_t seed = 13;
};

struct Lemma1Options {
  long horizon = 500;
  long warmup = 40;
  /// Floating-point allowance on the margin, relative to max(1, lhs).
  double relative_tolerance = 1e-10;
  std::uint64_t seed = 1;
};

struct SublinearityOptions {
  std::vector<long> horizons = {250, 500, 1000, 2000};
  int seeds = 20;
  int workers = 1;
  double hcfit_threshold = 0.80;
  double regret_threshold = 0.75;
  std::uint64_t seed = 1;
  /// Base configuration; horizon, samples and seed are overridden.
  ExperimentConfig base = default_sublinearity_config();

  static ExperimentConfig default_sublinearity_config();
};

VerificationReport verify_geometry(const GeometryOptions& options = {});
VerificationReport verify_gradients(const GradientOptions& options = {});
VerificationReport verify_lemma1(const Lemma1Options& options = {});

struct SublinearityFit {
  std::vector<long> horizons;
  std::vector<double> mean_hcfit;
  std::vector<double> mean_regret;
  double hcfit_exponent = 0.0;
  double regret_exponent = 0.0;
};
/// `fit`, when given, receives the measured means and exponents.
VerificationReport verify_sublinearity(const SublinearityOptions& options = {},
                                       SublinearityFit* fit = nullptr);

VerificationReport run_verification(VerificationSuite suite);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace gomsp
