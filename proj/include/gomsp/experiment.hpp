#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "gomsp/baselines.hpp"
#include "gomsp/constants.hpp"
#include "gomsp/experiment_config.hpp"
#include "gomsp/gomsp_core.hpp"
#include "gomsp/metrics.hpp"
#include "gomsp/problem.hpp"

namespace gomsp {

/// An online method seen from the runner: it exposes the action X_t it plays
/// in the current slot, then consumes that slot's feedback.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual const Vector& action() const = 0;
  virtual const Vector& dual() const = 0;
  virtual void observe(const SlotProblem& slot) = 0;
};

class GomspLearner final : public Learner {
 public:
  GomspLearner(GomspConfig cfg, const Vector& initial_score);
  const Vector& action() const override { return state_.primal; }
  const Vector& dual() const override { return state_.dual; }
  void observe(const SlotProblem& slot) override;
  const GomspState& state() const noexcept { return state_; }
  const GomspConfig& config() const noexcept { return cfg_; }

 private:
  GomspConfig cfg_;
  GomspState state_;
};

class MospLearner final : public Learner {
 public:
  MospLearner(double gamma, Eigen::Index dim, Eigen::Index num_constraints);
  const Vector& action() const override { return state_.primal; }
  const Vector& dual() const override { return state_.dual; }
  void observe(const SlotProblem& slot) override;

 private:
  double gamma_;
  MospState state_;
};

class SdgLearner final : public Learner {
 public:
  SdgLearner(double gamma, double tolerance, Eigen::Index dim, Eigen::Index num_constraints);
  const Vector& action() const override { return state_.primal; }
  const Vector& dual() const override { return state_.dual; }
  void observe(const SlotProblem& slot) override;

 private:
  double gamma_;
  double tolerance_;
  SdgState state_;
};

Regularizer make_regularizer(const AlgorithmSettings& a, double cap, Eigen::Index dim);
GomspConfig make_gomsp_config(const ExperimentConfig& cfg);
std::unique_ptr<Learner> make_learner(const ExperimentConfig& cfg);

/// Environment of one sample. The dispatch environment index is 0 unless the
/// config asks for a fresh environment per sample.
std::unique_ptr<Environment> make_environment(const ExperimentConfig& cfg, int sample);
std::uint64_t environment_index(const ExperimentConfig& cfg, int sample);
/// Slots of the action-independent view of the problem (tracking uses its
/// initial state), for constant estimation.
SlotSampler make_slot_sampler(const ExperimentConfig& cfg);

/// Per-slot benchmarks shared across samples and runs. Keys are
/// (problem fingerprint, environment index, slot); only action-independent
/// environments are cached.
class BenchmarkCache {
 public:
  Benchmark get(const std::string& fingerprint, std::uint64_t env_index, long slot,
                const SlotProblem& problem, const BenchmarkOptions& options);
  std::size_t size() const;

 private:
  using Key = std::tuple<std::string, std::uint64_t, long>;
  mutable std::mutex mutex_;
  std::map<Key, Benchmark> entries_;
};

struct SlotRow {
  long slot = 0;
  int sample = 0;
  double tadr = 0.0;
  double taccv = 0.0;
  double taql = 0.0;
  double hcfit_mean = 0.0;
  double dual_norm = 0.0;
  double regret_cum = 0.0;
  double gap_cum = 0.0;
};

/// Lemma 1 along one trajectory with Lambda_1 = 0:
///   sum_{tau<=t} h(g^r_tau(X_tau)) <= |Lambda_{t+1}|_2 / gamma + alpha sum_{tau<=t} |Lambda_tau|_2
/// for every r. margin() is the smallest rhs - lhs seen so far.
class Lemma1Monitor {
 public:
  Lemma1Monitor(double gamma, double alpha, Eigen::Index num_constraints);
  void record(const Vector& h_values, const Vector& dual_before, const Vector& dual_after);
  double margin() const noexcept { return margin_; }
  /// Margin of the latest slot over max(1, lhs).
  double relative_margin() const noexcept { return relative_margin_; }
  double worst_relative_margin() const noexcept { return worst_relative_; }
  long slots() const noexcept { return slots_; }

 private:
  double gamma_;
  double alpha_;
  Vector h_sum_;
  double dual_norm_sum_ = 0.0;
  double margin_ = std::numeric_limits<double>::infinity();
  double relative_margin_ = std::numeric_limits<double>::infinity();
  double worst_relative_ = std::numeric_limits<double>::infinity();
  long slots_ = 0;
};

/// Called after every slot, warm-up included: absolute slot, the slot, the
/// action played, and the learner's dual before and after the update.
using SlotHook = std::function<void(long, const SlotProblem&, const Vector&, const Vector&,
                                    const Vector&)>;

struct TrajectoryResult {
  int sample = 0;
  std::vector<SlotRow> rows;
  MetricsRecord record;
};

/// One sample: warm-up slots without metrics, then horizon recorded slots.
TrajectoryResult run_trajectory(const ExperimentConfig& cfg, int sample, BenchmarkCache* cache,
                                const SlotHook& hook = {});

struct ExperimentResult {
  std::string name;
  std::vector<TrajectoryResult> samples;  // in sample order

  /// series[s][t] of one SlotRow field.
  std::vector<std::vector<double>> series(double SlotRow::*field) const;
};

/// Runs every sample on cfg.workers threads and merges in sample order.
/// For GOMSP, warns when the step condition fails for the estimated C1.
ExperimentResult run_experiment(const ExperimentConfig& cfg, BenchmarkCache* cache = nullptr);

inline const std::vector<double> kPercentileLevels = {25.0, 50.0, 75.0, 90.0};

std::string format_sample_csv(const TrajectoryResult& trajectory);
std::string format_aggregate_csv(const ExperimentResult& result);
/// Writes sample_XXXXX.csv (if enabled) and aggregate.csv into `dir`.
void write_experiment_outputs(const ExperimentConfig& cfg, const ExperimentResult& result,
                              const std::string& dir);

struct ComparisonResult {
  std::vector<ExperimentResult> runs;
};

/// All runs must share problem, seed, horizon, warm-up and sample count, and
/// have distinct names.
ComparisonResult run_comparison(const std::vector<ExperimentConfig>& configs,
                                BenchmarkCache* cache = nullptr);
/// slot, then <name>_tadr, <name>_taccv, <name>_taql (means over samples).
std::string format_comparison_csv(const ComparisonResult& result);
void write_comparison_outputs(const ComparisonResult& result, const std::string& dir);

std::string format_number(double value);

}  // namespace gomsp
