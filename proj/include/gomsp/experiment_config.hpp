#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gomsp/dispatch.hpp"
#include "gomsp/mirror_geometry.hpp"
#include "gomsp/tracking.hpp"

namespace gomsp {

enum class ProblemKind { Dispatch, Tracking };
enum class AlgorithmKind { Gomsp, Mosp, Sdg };

const char* to_string(ProblemKind kind);
const char* to_string(AlgorithmKind kind);

struct DispatchSettings {
  Eigen::Index dim = 20;
  Eigen::Index num_constraints = 10;
  double cap = 1.0;
  double demand_penalty = 20.0;
  double sigma_a = 0.2;
  double sigma_b = 1.0;
  bool per_coordinate_draws = false;
  bool per_constraint_thresholds = false;
  double perturbation_scale = 1.0;
  /// Redraw the environment (constraint matrices and slot perturbations) for
  /// every sample instead of varying only the observation noise.
  bool environment_per_sample = false;

  /// Materializes DispatchParams for one environment index.
  DispatchParams params(const RngStreams& rng, std::uint64_t environment_index) const;
};

struct AlgorithmSettings {
  AlgorithmKind kind = AlgorithmKind::Gomsp;
  /// gamma = gamma if set, else gamma_scale / sqrt(T).
  std::optional<double> gamma;
  double gamma_scale = 0.1;
  /// alpha = alpha if set, else alpha_ratio * gamma.
  std::optional<double> alpha;
  double alpha_ratio = 15.0;
  RegularizerKind regularizer = RegularizerKind::SmoothedEntropy;
  double epsilon = 0.5;
  /// Power p of h = [.]_+^p; also the h used for the hCFit metric.
  double power = 1.0;
  /// Inner argmin tolerance for SDG.
  double inner_tolerance = 1e-8;

  double resolved_gamma(long horizon) const;
  double resolved_alpha(long horizon) const;
};

struct ExperimentConfig {
  std::string name = "run";
  ProblemKind problem = ProblemKind::Dispatch;
  DispatchSettings dispatch;
  TrackingParams tracking = TrackingParams::planar_default();
  AlgorithmSettings algorithm;
  long horizon = 500;
  long warmup = 40;
  int samples = 200;
  std::uint64_t seed = 1;
  double benchmark_tolerance = 1e-8;
  int workers = 1;
  std::string output = "out";
  bool write_sample_files = true;

  Eigen::Index dimension() const;
  Eigen::Index num_constraints() const;
  double cap() const;

  /// Throws ConfigError on any invariant violation.
  void validate() const;
  /// Canonical JSON of the problem block (kind + parameters); equal strings
  /// mean the same environment given the same seed.
  std::string problem_fingerprint() const;
};

/// A set of runs sharing one problem, seed, horizon and sample count.
struct ComparisonConfig {
  std::vector<ExperimentConfig> runs;
  std::string output = "out";
};

// JSON schema (unknown keys are rejected at every level):
//
// {
//   "name": str, "horizon": int, "warmup": int, "samples": int, "seed": int,
//   "workers": int, "output": str, "benchmark_tolerance": num,
//   "write_sample_files": bool,
//   "problem": {"kind": "dispatch"|"tracking", "dispatch": {...}, "tracking": {...}},
//   "algorithm": {"kind": "gomsp"|"mosp"|"sdg", "gamma": num, "gamma_scale": num,
//                 "alpha": num, "alpha_ratio": num, "regularizer": "entropy"|"euclidean",
//                 "epsilon": num, "power": num, "inner_tolerance": num}
// }
//
// A comparison file carries the same top-level keys except "algorithm" and
// "name", plus "runs": [{"name": str, "algorithm": {...}}, ...].
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);
ComparisonConfig comparison_config_from_json(const nlohmann::json& j);

ExperimentConfig load_experiment_config(const std::string& path);
ComparisonConfig load_comparison_config(const std::string& path);

}  // namespace gomsp
