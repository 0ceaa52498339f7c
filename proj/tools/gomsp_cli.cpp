#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gomsp/constants.hpp"
#include "gomsp/experiment.hpp"
#include "gomsp/experiment_config.hpp"
#include "gomsp/rng.hpp"
#include "gomsp/verification.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitVerification = 3;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::optional<std::string> out;
  std::optional<int> workers;

  void apply(gomsp::ExperimentConfig& cfg) const {
    if (seed) cfg.seed = *seed;
    if (samples) cfg.samples = *samples;
    if (out) cfg.output = *out;
    if (workers) cfg.workers = *workers;
  }
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--samples", o.samples, "Number of samples");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--workers", o.workers, "Worker threads");
}

int exit_code(const gomsp::Error& e) {
  switch (e.kind()) {
    case gomsp::ErrorKind::Config:
    case gomsp::ErrorKind::Io:
    case gomsp::ErrorKind::InvalidInput:
      return kExitConfig;
    default:
      return kExitNumerical;
  }
}

int cmd_run(const std::string& path, const Overrides& o) {
  gomsp::ExperimentConfig cfg = gomsp::load_experiment_config(path);
  o.apply(cfg);
  cfg.validate();
  const gomsp::ExperimentResult result = gomsp::run_experiment(cfg);
  gomsp::write_experiment_outputs(cfg, result, cfg.output);
  const auto& last = result.samples.front().rows.back();
  fmt::print("{}: {} samples x {} slots written to {} (sample 0 final tadr={:.6g} taccv={:.6g})\n",
             cfg.name, cfg.samples, cfg.horizon, cfg.output, last.tadr, last.taccv);
  return kExitOk;
}

int cmd_compare(const std::string& path, const Overrides& o) {
  gomsp::ComparisonConfig cmp = gomsp::load_comparison_config(path);
  for (auto& cfg : cmp.runs) {
    o.apply(cfg);
    cfg.validate();
  }
  if (o.out) cmp.output = *o.out;
  const gomsp::ComparisonResult result = gomsp::run_comparison(cmp.runs);
  gomsp::write_comparison_outputs(result, cmp.output);
  for (std::size_t i = 0; i < result.runs.size(); ++i) {
    gomsp::write_experiment_outputs(cmp.runs[i], result.runs[i], cmp.output + "/" + cmp.runs[i].name);
  }
  fmt::print("{} runs compared, written to {}\n", result.runs.size(), cmp.output);
  return kExitOk;
}

int cmd_verify(const std::string& suite_name, const Overrides& o) {
  const gomsp::VerificationSuite suite = gomsp::verification_suite_from_string(suite_name);
  gomsp::VerificationReport report;
  if (suite == gomsp::VerificationSuite::Sublinearity) {
    gomsp::SublinearityOptions opts;
    if (o.samples) opts.seeds = *o.samples;
    if (o.workers) opts.workers = *o.workers;
    if (o.seed) opts.seed = *o.seed;
    report = gomsp::verify_sublinearity(opts);
  } else if (suite == gomsp::VerificationSuite::Lemma1 && o.seed) {
    gomsp::Lemma1Options opts;
    opts.seed = *o.seed;
    report = gomsp::verify_lemma1(opts);
  } else {
    report = gomsp::run_verification(suite);
  }
  std::cout << report.format();
  return report.passed() ? kExitOk : kExitVerification;
}

int cmd_estimate(const std::string& path, const Overrides& o, int slot_samples) {
  gomsp::ExperimentConfig cfg = gomsp::load_experiment_config(path);
  o.apply(cfg);
  cfg.validate();
  const gomsp::Regularizer reg = gomsp::make_regularizer(cfg.algorithm, cfg.cap(), cfg.dimension());
  const gomsp::PenaltyTransform h{cfg.algorithm.power};
  auto gen = gomsp::RngStreams(cfg.seed).generator(gomsp::streams::kEstimation, 0);
  const gomsp::ConstantsEstimate est = gomsp::estimate_constants(
      gomsp::make_slot_sampler(cfg), reg, h, 1, cfg.warmup + cfg.horizon, slot_samples, gen);
  const gomsp::GeometryConstants geo = gomsp::geometry_constants(reg);
  fmt::print("regularizer {} (dual norm {})\n", gomsp::to_string(reg.kind),
             reg.kind == gomsp::RegularizerKind::Euclidean ? "l2" : "linf");
  fmt::print("C1 {:.6g}\nC2 {:.6g}\nC3 {:.6g}\nL_f {:.6g}\n", est.c1, est.c2, est.c3,
             est.loss_lipschitz);
  fmt::print("K {:.6g}\nL_psi {:.6g}\nD_psi {:.6g}\nD_X {:.6g}\n", geo.strong_convexity_K,
             geo.steepness_L_psi, geo.diameter_term_D_psi, geo.set_diameter_D_X);
  fmt::print("evaluations {} over {} slots\n", est.evaluations, est.sample_count);
  if (cfg.algorithm.kind == gomsp::AlgorithmKind::Gomsp) {
    const gomsp::GomspConfig gc = gomsp::make_gomsp_config(cfg);
    fmt::print("step condition {}\n",
               gomsp::validate_step_condition(gc, est.c1, geo.strong_convexity_K) ? "holds"
                                                                                  : "fails");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online saddle-point experiments with long-term constraints"};
  app.require_subcommand(1);

  Overrides overrides;
  std::string config_path;
  std::string suite;
  int slot_samples = 200;

  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("--config", config_path, "JSON config")->required();
  add_overrides(run, overrides);

  auto* compare = app.add_subcommand("compare", "Run several algorithms on one problem");
  compare->add_option("--config", config_path, "JSON comparison config")->required();
  add_overrides(compare, overrides);

  auto* verify = app.add_subcommand("verify", "Run a property suite");
  verify->add_option("suite", suite, "geometry|gradients|lemma1|sublinearity")->required();
  add_overrides(verify, overrides);

  auto* estimate = app.add_subcommand("estimate-constants", "Estimate C1, C2, C3 and L_f");
  estimate->add_option("--config", config_path, "JSON config")->required();
  estimate->add_option("--slots", slot_samples, "Slots to sample");
  add_overrides(estimate, overrides);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, overrides);
    if (*compare) return cmd_compare(config_path, overrides);
    if (*verify) return cmd_verify(suite, overrides);
    if (*estimate) return cmd_estimate(config_path, overrides, slot_samples);
  } catch (const gomsp::Error& e) {
    std::cerr << "error (" << gomsp::to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitConfig;
}
