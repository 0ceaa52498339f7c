#include "gomsp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <thread>

#include <fmt/format.h>

#include "gomsp/dispatch.hpp"
#include "gomsp/mirror_geometry.hpp"
#include "gomsp/rng.hpp"
#include "gomsp/tracking.hpp"

namespace gomsp {

namespace fs = std::filesystem;

GomspLearner::GomspLearner(GomspConfig cfg, const Vector& initial_score)
    : cfg_(std::move(cfg)), state_(GomspState::initial(initial_score, cfg_)) {}

void GomspLearner::observe(const SlotProblem& slot) {
  FirstOrderFeedback fb;
  fb.noisy_loss_grad = slot.observed_loss_gradient(state_.primal);
  fb.constraint_values = slot.constraints(state_.primal);
  fb.constraint_grads = slot.constraint_gradients(state_.primal);
  state_ = gomsp_step(state_, fb, cfg_);
}

MospLearner::MospLearner(double gamma, Eigen::Index dim, Eigen::Index num_constraints)
    : gamma_(gamma), state_(MospState::initial(dim, num_constraints)) {}

void MospLearner::observe(const SlotProblem& slot) { state_ = mosp_step(state_, slot, gamma_); }

SdgLearner::SdgLearner(double gamma, double tolerance, Eigen::Index dim,
                       Eigen::Index num_constraints)
    : gamma_(gamma), tolerance_(tolerance), state_(SdgState::initial(dim, num_constraints)) {}

void SdgLearner::observe(const SlotProblem& slot) {
  state_ = sdg_step(state_, slot, gamma_, tolerance_);
}

Regularizer make_regularizer(const AlgorithmSettings& a, double cap, Eigen::Index dim) {
  return a.regularizer == RegularizerKind::Euclidean
             ? Regularizer::euclidean(cap, dim)
             : Regularizer::smoothed_entropy(a.epsilon, cap, dim);
}

GomspConfig make_gomsp_config(const ExperimentConfig& cfg) {
  GomspConfig g;
  g.gamma = cfg.algorithm.resolved_gamma(cfg.horizon);
  g.alpha = cfg.algorithm.resolved_alpha(cfg.horizon);
  g.regularizer = make_regularizer(cfg.algorithm, cfg.cap(), cfg.dimension());
  g.penalty.power = cfg.algorithm.power;
  g.num_constraints = cfg.num_constraints();
  g.validate();
  return g;
}

std::unique_ptr<Learner> make_learner(const ExperimentConfig& cfg) {
  const double gamma = cfg.algorithm.resolved_gamma(cfg.horizon);
  switch (cfg.algorithm.kind) {
    case AlgorithmKind::Gomsp:
      return std::make_unique<GomspLearner>(make_gomsp_config(cfg), Vector::Zero(cfg.dimension()));
    case AlgorithmKind::Mosp:
      return std::make_unique<MospLearner>(gamma, cfg.dimension(), cfg.num_constraints());
    case AlgorithmKind::Sdg:
      return std::make_unique<SdgLearner>(gamma, cfg.algorithm.inner_tolerance, cfg.dimension(),
                                          cfg.num_constraints());
  }
  throw ConfigError("unknown algorithm");
}

std::uint64_t environment_index(const ExperimentConfig& cfg, int sample) {
  return cfg.problem == ProblemKind::Dispatch && cfg.dispatch.environment_per_sample
             ? static_cast<std::uint64_t>(sample)
             : 0;
}

std::unique_ptr<Environment> make_environment(const ExperimentConfig& cfg, int sample) {
  const RngStreams rng(cfg.seed);
  const auto noise_index = static_cast<std::uint64_t>(sample);
  if (cfg.problem == ProblemKind::Dispatch) {
    const std::uint64_t env = environment_index(cfg, sample);
    auto params = std::make_shared<const DispatchParams>(cfg.dispatch.params(rng, env));
    return std::make_unique<DispatchEnvironment>(params, rng, env, noise_index);
  }
  auto params = std::make_shared<const TrackingParams>(cfg.tracking);
  return std::make_unique<TrackingEnvironment>(params, rng, noise_index);
}

SlotSampler make_slot_sampler(const ExperimentConfig& cfg) {
  const RngStreams rng(cfg.seed);
  if (cfg.problem == ProblemKind::Dispatch) {
    auto params = std::make_shared<const DispatchParams>(cfg.dispatch.params(rng, 0));
    return [params, rng](long t) -> std::unique_ptr<SlotProblem> {
      return std::make_unique<DispatchSlot>(params, dispatch_generate_round(*params, rng, t));
    };
  }
  auto params = std::make_shared<const TrackingParams>(cfg.tracking);
  return [params](long t) -> std::unique_ptr<SlotProblem> {
    Vector target = params->target(t + 1);
    return std::make_unique<TrackingSlot>(params, params->initial_state, target, target);
  };
}

Benchmark BenchmarkCache::get(const std::string& fingerprint, std::uint64_t env_index, long slot,
                              const SlotProblem& problem, const BenchmarkOptions& options) {
  Key key{fingerprint, env_index, slot};
  {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it != entries_.end()) return it->second;
  }
  // Computed outside the lock; a concurrent duplicate yields the same value.
  Benchmark b = per_slot_optimum(problem, options);
  std::lock_guard lock(mutex_);
  return entries_.emplace(std::move(key), std::move(b)).first->second;
}

std::size_t BenchmarkCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

Lemma1Monitor::Lemma1Monitor(double gamma, double alpha, Eigen::Index num_constraints)
    : gamma_(gamma), alpha_(alpha), h_sum_(Vector::Zero(num_constraints)) {
  if (!(gamma > 0.0)) throw InvalidInputError("Lemma1Monitor: gamma must be positive");
}

void Lemma1Monitor::record(const Vector& h_values, const Vector& dual_before,
                           const Vector& dual_after) {
  h_sum_ += h_values;
  dual_norm_sum_ += dual_before.norm();
  ++slots_;
  const double rhs = dual_after.norm() / gamma_ + alpha_ * dual_norm_sum_;
  const double lhs = h_sum_.size() > 0 ? h_sum_.maxCoeff() : 0.0;
  const double m = rhs - lhs;
  margin_ = std::min(margin_, m);
  relative_margin_ = m / std::max(1.0, lhs);
  worst_relative_ = std::min(worst_relative_, relative_margin_);
}

TrajectoryResult run_trajectory(const ExperimentConfig& cfg, int sample, BenchmarkCache* cache,
                                const SlotHook& hook) {
  auto env = make_environment(cfg, sample);
  auto learner = make_learner(cfg);
  const PenaltyTransform h{cfg.algorithm.power};
  const Eigen::Index rows = cfg.num_constraints();
  BenchmarkOptions options;
  options.tolerance = cfg.benchmark_tolerance;
  const bool cacheable = cache != nullptr && !env->depends_on_actions();
  const std::string fingerprint = cacheable ? cfg.problem_fingerprint() : std::string();
  const std::uint64_t env_index = environment_index(cfg, sample);

  TrajectoryResult out;
  out.sample = sample;
  out.record = MetricsRecord::empty(rows);
  out.rows.reserve(static_cast<std::size_t>(cfg.horizon));

  const long total = cfg.warmup + cfg.horizon;
  for (long t = 1; t <= total; ++t) {
    auto slot = env->reveal(t);
    const Vector played = learner->action();
    const Vector dual_before = learner->dual();

    if (t > cfg.warmup) {
      const Benchmark b = cacheable ? cache->get(fingerprint, env_index, t, *slot, options)
                                    : per_slot_optimum(*slot, options);
      out.record = update_metrics(out.record, played, *slot, h, b);
    }
    env->commit(played);
    learner->observe(*slot);
    if (hook) hook(t, *slot, played, dual_before, learner->dual());

    if (t > cfg.warmup) {
      const TimeAverages avg = time_averages(out.record, rows);
      SlotRow row;
      row.slot = t - cfg.warmup;
      row.sample = sample;
      row.tadr = avg.tadr;
      row.taccv = avg.taccv;
      row.taql = avg.taql;
      row.hcfit_mean = rows > 0 ? out.record.hcfit.mean() : 0.0;
      row.dual_norm = learner->dual().norm();
      row.regret_cum = out.record.cum_dynamic_regret;
      row.gap_cum = out.record.cum_gap;
      out.rows.push_back(row);
    }
  }
  return out;
}

std::vector<std::vector<double>> ExperimentResult::series(double SlotRow::*field) const {
  std::vector<std::vector<double>> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    std::vector<double> v;
    v.reserve(s.rows.size());
    for (const auto& row : s.rows) v.push_back(row.*field);
    out.push_back(std::move(v));
  }
  return out;
}

namespace {

void warn_step_condition(const ExperimentConfig& cfg) {
  if (cfg.algorithm.kind != AlgorithmKind::Gomsp || cfg.num_constraints() == 0) return;
  const GomspConfig g = make_gomsp_config(cfg);
  const RngStreams rng(cfg.seed);
  auto gen = rng.generator(streams::kEstimation, 0);
  const ConstantsEstimate est = estimate_constants(make_slot_sampler(cfg), g.regularizer, g.penalty,
                                                   1, cfg.warmup + cfg.horizon, 20, gen);
  const double k = geometry_constants(g.regularizer).strong_convexity_K;
  if (!validate_step_condition(g, est.c1, k)) {
    warn(fmt::format("{}: step condition alpha - gamma (alpha^2 - C1^2/K) >= 0 fails "
                     "(alpha={:.4g}, gamma={:.4g}, C1~{:.4g}, K={:.4g}); running anyway",
                     cfg.name, g.alpha, g.gamma, est.c1, k));
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, BenchmarkCache* cache) {
  cfg.validate();
  warn_step_condition(cfg);

  BenchmarkCache local;
  if (cache == nullptr) cache = &local;

  ExperimentResult result;
  result.name = cfg.name;
  result.samples.resize(static_cast<std::size_t>(cfg.samples));

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const int s = next.fetch_add(1);
      if (s >= cfg.samples) return;
      {
        std::lock_guard lock(failure_mutex);
        if (failure) return;
      }
      try {
        result.samples[static_cast<std::size_t>(s)] = run_trajectory(cfg, s, cache);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const int threads = std::min(cfg.workers, cfg.samples);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

std::string format_number(double value) { return fmt::format("{:.17g}", value); }

std::string format_sample_csv(const TrajectoryResult& trajectory) {
  std::string out = "slot,sample,tadr,taccv,taql,hcfit_mean,dual_norm,regret_cum,gap_cum\n";
  for (const auto& r : trajectory.rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.slot, r.sample, format_number(r.tadr),
                       format_number(r.taccv), format_number(r.taql), format_number(r.hcfit_mean),
                       format_number(r.dual_norm), format_number(r.regret_cum),
                       format_number(r.gap_cum));
  }
  return out;
}

std::string format_aggregate_csv(const ExperimentResult& result) {
  if (result.samples.empty() || result.samples.front().rows.empty()) {
    throw EmptyRecordError("format_aggregate_csv: no samples");
  }
  const std::vector<std::pair<const char*, double SlotRow::*>> metrics = {
      {"tadr", &SlotRow::tadr},
      {"taccv", &SlotRow::taccv},
      {"taql", &SlotRow::taql},
      {"hcfit", &SlotRow::hcfit_mean}};

  std::vector<PercentileBands> bands;
  std::string out = "slot";
  for (const auto& [name, field] : metrics) {
    bands.push_back(aggregate_percentiles(result.series(field), kPercentileLevels));
    out += fmt::format(",{0}_mean,{0}_p25,{0}_p50,{0}_p75,{0}_p90", name);
  }
  out += '\n';
  const auto& rows = result.samples.front().rows;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    out += std::to_string(rows[t].slot);
    for (const auto& b : bands) {
      out += ',' + format_number(b.mean[t]);
      for (const auto& level : b.band) out += ',' + format_number(level[t]);
    }
    out += '\n';
  }
  return out;
}

namespace {

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError(fmt::format("cannot create output directory '{}'", dir));
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

}  // namespace

void write_experiment_outputs(const ExperimentConfig& cfg, const ExperimentResult& result,
                              const std::string& dir) {
  ensure_directory(dir);
  if (cfg.write_sample_files) {
    for (const auto& s : result.samples) {
      write_text(fs::path(dir) / fmt::format("sample_{:05d}.csv", s.sample), format_sample_csv(s));
    }
  }
  write_text(fs::path(dir) / "aggregate.csv", format_aggregate_csv(result));
}

ComparisonResult run_comparison(const std::vector<ExperimentConfig>& configs,
                                BenchmarkCache* cache) {
  if (configs.empty()) throw ConfigError("run_comparison: no runs");
  const ExperimentConfig& first = configs.front();
  std::vector<std::string> names;
  for (const auto& c : configs) {
    if (c.problem_fingerprint() != first.problem_fingerprint()) {
      throw ConfigError(fmt::format("run_comparison: '{}' has a different problem or seed", c.name));
    }
    if (c.horizon != first.horizon || c.warmup != first.warmup || c.samples != first.samples) {
      throw ConfigError(
          fmt::format("run_comparison: '{}' differs in horizon, warmup or samples", c.name));
    }
    if (std::find(names.begin(), names.end(), c.name) != names.end()) {
      throw ConfigError(fmt::format("run_comparison: duplicate run name '{}'", c.name));
    }
    names.push_back(c.name);
  }
  BenchmarkCache local;
  if (cache == nullptr) cache = &local;
  ComparisonResult out;
  for (const auto& c : configs) out.runs.push_back(run_experiment(c, cache));
  return out;
}

std::string format_comparison_csv(const ComparisonResult& result) {
  if (result.runs.empty()) throw EmptyRecordError("format_comparison_csv: no runs");
  std::string out = "slot";
  std::vector<std::vector<double>> columns;
  for (const auto& run : result.runs) {
    for (const auto& [suffix, field] :
         {std::pair{"tadr", &SlotRow::tadr}, {"taccv", &SlotRow::taccv}, {"taql", &SlotRow::taql}}) {
      out += fmt::format(",{}_{}", run.name, suffix);
      columns.push_back(aggregate_percentiles(run.series(field), {50.0}).mean);
    }
  }
  out += '\n';
  const auto& rows = result.runs.front().samples.front().rows;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    out += std::to_string(rows[t].slot);
    for (const auto& col : columns) out += ',' + format_number(col[t]);
    out += '\n';
  }
  return out;
}

void write_comparison_outputs(const ComparisonResult& result, const std::string& dir) {
  ensure_directory(dir);
  write_text(fs::path(dir) / "comparison.csv", format_comparison_csv(result));
}

}  // namespace gomsp
