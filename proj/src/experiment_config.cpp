#include "gomsp/experiment_config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>

namespace gomsp {

using nlohmann::json;

namespace {

// Reads keys out of one JSON object and rejects whatever was not read.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) {
      throw ConfigError(fmt::format("{}: expected a JSON object", where_));
    }
  }

  template <typename T>
  bool read(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return false;
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(fmt::format("{}.{}: {}", where_, key, e.what()));
    }
    return true;
  }

  template <typename T>
  bool read_optional(const char* key, std::optional<T>& out) {
    T value{};
    if (!read(key, value)) return false;
    out = value;
    return true;
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.contains(it.key())) {
        throw ConfigError(fmt::format("{}: unknown key '{}'", where_, it.key()));
      }
    }
  }

  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

Vector vector_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(fmt::format("{}: expected an array", where));
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(fmt::format("{}: expected numbers", where));
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Matrix matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(fmt::format("{}: expected an array of rows", where));
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].is_array() ? j[0].size() : 0);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vector row = vector_from_json(j[static_cast<std::size_t>(r)], where);
    if (row.size() != cols) throw ConfigError(fmt::format("{}: ragged matrix", where));
    m.row(r) = row.transpose();
  }
  return m;
}

json to_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(Vector(m.row(r).transpose())));
  return rows;
}

void read_dispatch(const json& j, DispatchSettings& d) {
  ObjectReader r(j, "problem.dispatch");
  long dim = d.dim;
  long rows = d.num_constraints;
  r.read("dim", dim);
  r.read("num_constraints", rows);
  d.dim = dim;
  d.num_constraints = rows;
  r.read("cap", d.cap);
  r.read("demand_penalty", d.demand_penalty);
  r.read("sigma_a", d.sigma_a);
  r.read("sigma_b", d.sigma_b);
  r.read("per_coordinate_draws", d.per_coordinate_draws);
  r.read("per_constraint_thresholds", d.per_constraint_thresholds);
  r.read("perturbation_scale", d.perturbation_scale);
  r.read("environment_per_sample", d.environment_per_sample);
  r.finish();
}

json dispatch_to_json(const DispatchSettings& d) {
  return json{{"dim", d.dim},
              {"num_constraints", d.num_constraints},
              {"cap", d.cap},
              {"demand_penalty", d.demand_penalty},
              {"sigma_a", d.sigma_a},
              {"sigma_b", d.sigma_b},
              {"per_coordinate_draws", d.per_coordinate_draws},
              {"per_constraint_thresholds", d.per_constraint_thresholds},
              {"perturbation_scale", d.perturbation_scale},
              {"environment_per_sample", d.environment_per_sample}};
}

void read_tracking(const json& j, TrackingParams& t) {
  ObjectReader r(j, "problem.tracking");
  if (const json* a = r.child("system_A")) t.system_A = matrix_from_json(*a, "problem.tracking.system_A");
  if (const json* b = r.child("input_B")) t.input_B = matrix_from_json(*b, "problem.tracking.input_B");
  if (const json* v = r.child("u_min")) t.u_min = vector_from_json(*v, "problem.tracking.u_min");
  if (const json* v = r.child("u_max")) t.u_max = vector_from_json(*v, "problem.tracking.u_max");
  if (const json* v = r.child("initial_state")) {
    t.initial_state = vector_from_json(*v, "problem.tracking.initial_state");
  }
  if (const json* v = r.child("target_center")) {
    t.target_center = vector_from_json(*v, "problem.tracking.target_center");
  }
  r.read("smoothness_beta", t.smoothness_beta);
  r.read("energy_cap", t.energy_cap);
  r.read("cap", t.cap);
  r.read("target_radius", t.target_radius);
  r.read("target_period", t.target_period);
  r.read("sigma_target", t.sigma_target);
  r.finish();
}

json tracking_to_json(const TrackingParams& t) {
  return json{{"system_A", to_json(t.system_A)},
              {"input_B", to_json(t.input_B)},
              {"u_min", to_json(t.u_min)},
              {"u_max", to_json(t.u_max)},
              {"initial_state", to_json(t.initial_state)},
              {"target_center", to_json(t.target_center)},
              {"smoothness_beta", t.smoothness_beta},
              {"energy_cap", t.energy_cap},
              {"cap", t.cap},
              {"target_radius", t.target_radius},
              {"target_period", t.target_period},
              {"sigma_target", t.sigma_target}};
}

AlgorithmKind algorithm_kind_from_string(const std::string& s) {
  if (s == "gomsp") return AlgorithmKind::Gomsp;
  if (s == "mosp") return AlgorithmKind::Mosp;
  if (s == "sdg" || s == "odg") return AlgorithmKind::Sdg;
  throw ConfigError(fmt::format("unknown algorithm '{}' (expected gomsp|mosp|sdg)", s));
}

ProblemKind problem_kind_from_string(const std::string& s) {
  if (s == "dispatch") return ProblemKind::Dispatch;
  if (s == "tracking") return ProblemKind::Tracking;
  throw ConfigError(fmt::format("unknown problem '{}' (expected dispatch|tracking)", s));
}

void read_algorithm(const json& j, AlgorithmSettings& a) {
  ObjectReader r(j, "algorithm");
  std::string kind = to_string(a.kind);
  r.read("kind", kind);
  a.kind = algorithm_kind_from_string(kind);
  r.read_optional("gamma", a.gamma);
  r.read("gamma_scale", a.gamma_scale);
  r.read_optional("alpha", a.alpha);
  r.read("alpha_ratio", a.alpha_ratio);
  std::string reg = to_string(a.regularizer);
  r.read("regularizer", reg);
  a.regularizer = regularizer_kind_from_string(reg);
  r.read("epsilon", a.epsilon);
  r.read("power", a.power);
  r.read("inner_tolerance", a.inner_tolerance);
  r.finish();
}

json algorithm_to_json(const AlgorithmSettings& a) {
  json j{{"kind", to_string(a.kind)},
         {"gamma_scale", a.gamma_scale},
         {"alpha_ratio", a.alpha_ratio},
         {"regularizer", to_string(a.regularizer)},
         {"epsilon", a.epsilon},
         {"power", a.power},
         {"inner_tolerance", a.inner_tolerance}};
  if (a.gamma) j["gamma"] = *a.gamma;
  if (a.alpha) j["alpha"] = *a.alpha;
  return j;
}

void read_problem(const json& j, ExperimentConfig& cfg) {
  ObjectReader r(j, "problem");
  std::string kind = to_string(cfg.problem);
  r.read("kind", kind);
  cfg.problem = problem_kind_from_string(kind);
  if (const json* d = r.child("dispatch")) read_dispatch(*d, cfg.dispatch);
  if (const json* t = r.child("tracking")) read_tracking(*t, cfg.tracking);
  r.finish();
}

// Top-level keys shared by single-run and comparison files.
void read_common(ObjectReader& r, ExperimentConfig& cfg) {
  r.read("horizon", cfg.horizon);
  r.read("warmup", cfg.warmup);
  r.read("samples", cfg.samples);
  r.read("seed", cfg.seed);
  r.read("workers", cfg.workers);
  r.read("output", cfg.output);
  r.read("benchmark_tolerance", cfg.benchmark_tolerance);
  r.read("write_sample_files", cfg.write_sample_files);
  if (const json* p = r.child("problem")) read_problem(*p, cfg);
}

json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
}

}  // namespace

const char* to_string(ProblemKind kind) {
  return kind == ProblemKind::Dispatch ? "dispatch" : "tracking";
}

const char* to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::Gomsp: return "gomsp";
    case AlgorithmKind::Mosp: return "mosp";
    case AlgorithmKind::Sdg: return "sdg";
  }
  return "unknown";
}

DispatchParams DispatchSettings::params(const RngStreams& rng, std::uint64_t environment_index) const {
  DispatchParams p = make_dispatch_params(dim, num_constraints, rng, environment_index);
  p.cap = cap;
  p.demand_penalty = demand_penalty;
  p.sigma_a = sigma_a;
  p.sigma_b = sigma_b;
  p.per_coordinate_draws = per_coordinate_draws;
  p.per_constraint_thresholds = per_constraint_thresholds;
  p.perturbation_scale = perturbation_scale;
  return p;
}

double AlgorithmSettings::resolved_gamma(long horizon) const {
  return gamma ? *gamma : gamma_scale / std::sqrt(static_cast<double>(horizon));
}

double AlgorithmSettings::resolved_alpha(long horizon) const {
  return alpha ? *alpha : alpha_ratio * resolved_gamma(horizon);
}

Eigen::Index ExperimentConfig::dimension() const {
  return problem == ProblemKind::Dispatch ? dispatch.dim : tracking.control_dim();
}

Eigen::Index ExperimentConfig::num_constraints() const {
  return problem == ProblemKind::Dispatch ? dispatch.num_constraints : tracking.num_constraints();
}

double ExperimentConfig::cap() const {
  return problem == ProblemKind::Dispatch ? dispatch.cap : tracking.cap;
}

void ExperimentConfig::validate() const {
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (warmup < 0) throw ConfigError("warmup must be >= 0");
  if (samples < 1) throw ConfigError("samples must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (!(benchmark_tolerance > 0.0)) throw ConfigError("benchmark_tolerance must be positive");
  if (name.empty()) throw ConfigError("name must not be empty");

  if (problem == ProblemKind::Dispatch) {
    if (dispatch.dim < 1 || dispatch.num_constraints < 0) {
      throw ConfigError("dispatch: dim must be >= 1 and num_constraints >= 0");
    }
    dispatch.params(RngStreams(seed), 0).validate();
  } else {
    tracking.validate();
  }

  const double gamma = algorithm.resolved_gamma(horizon);
  const double alpha = algorithm.resolved_alpha(horizon);
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be >= 0");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be >= 0");
  if (!(algorithm.power >= 1.0)) throw ConfigError("power must be >= 1");
  if (!(algorithm.inner_tolerance > 0.0)) throw ConfigError("inner_tolerance must be positive");
  if (algorithm.kind == AlgorithmKind::Gomsp) {
    if (!(alpha * gamma < 1.0)) throw ConfigError("alpha * gamma must be < 1");
    if (algorithm.regularizer == RegularizerKind::SmoothedEntropy && !(algorithm.epsilon > 0.0)) {
      throw ConfigError("epsilon must be positive");
    }
  }
}

std::string ExperimentConfig::problem_fingerprint() const {
  json j{{"kind", to_string(problem)}, {"seed", seed}};
  if (problem == ProblemKind::Dispatch) {
    j["dispatch"] = dispatch_to_json(dispatch);
  } else {
    j["tracking"] = tracking_to_json(tracking);
  }
  return j.dump();
}

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig cfg;
  ObjectReader r(j, "config");
  r.read("name", cfg.name);
  read_common(r, cfg);
  if (const json* a = r.child("algorithm")) read_algorithm(*a, cfg.algorithm);
  r.finish();
  cfg.validate();
  return cfg;
}

json experiment_config_to_json(const ExperimentConfig& cfg) {
  json problem{{"kind", to_string(cfg.problem)}};
  if (cfg.problem == ProblemKind::Dispatch) {
    problem["dispatch"] = dispatch_to_json(cfg.dispatch);
  } else {
    problem["tracking"] = tracking_to_json(cfg.tracking);
  }
  return json{{"name", cfg.name},
              {"horizon", cfg.horizon},
              {"warmup", cfg.warmup},
              {"samples", cfg.samples},
              {"seed", cfg.seed},
              {"workers", cfg.workers},
              {"output", cfg.output},
              {"benchmark_tolerance", cfg.benchmark_tolerance},
              {"write_sample_files", cfg.write_sample_files},
              {"problem", problem},
              {"algorithm", algorithm_to_json(cfg.algorithm)}};
}

ComparisonConfig comparison_config_from_json(const json& j) {
  ExperimentConfig base;
  ObjectReader r(j, "config");
  read_common(r, base);
  const json* runs = r.child("runs");
  r.finish();
  if (runs == nullptr || !runs->is_array() || runs->empty()) {
    throw ConfigError("comparison config needs a non-empty 'runs' array");
  }
  ComparisonConfig out;
  out.output = base.output;
  std::set<std::string> names;
  for (std::size_t i = 0; i < runs->size(); ++i) {
    ExperimentConfig cfg = base;
    ObjectReader rr((*runs)[i], fmt::format("runs[{}]", i));
    cfg.name = fmt::format("run{}", i);
    rr.read("name", cfg.name);
    if (const json* a = rr.child("algorithm")) read_algorithm(*a, cfg.algorithm);
    rr.finish();
    if (!names.insert(cfg.name).second) {
      throw ConfigError(fmt::format("duplicate run name '{}'", cfg.name));
    }
    cfg.validate();
    out.runs.push_back(std::move(cfg));
  }
  return out;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_config_from_json(read_file(path));
}

ComparisonConfig load_comparison_config(const std::string& path) {
  return comparison_config_from_json(read_file(path));
}

}  // namespace gomsp
