#include "gomsp/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "gomsp/constants.hpp"
#include "gomsp/dispatch.hpp"
#include "gomsp/experiment.hpp"
#include "gomsp/gomsp_core.hpp"
#include "gomsp/mirror_geometry.hpp"
#include "gomsp/rng.hpp"
#include "gomsp/tracking.hpp"

namespace gomsp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

class Tally {
 public:
  explicit Tally(std::string name) : name_(std::move(name)) {}

  void add(double slack) {
    ++cases_;
    if (!(slack >= worst_)) worst_ = std::isnan(slack) ? -std::numeric_limits<double>::infinity() : slack;
  }

  CheckResult result(std::string detail = {}) const {
    CheckResult r;
    r.name = name_;
    r.cases = cases_;
    r.margin = worst_;
    r.passed = cases_ > 0 && worst_ >= 0.0;
    r.detail = std::move(detail);
    return r;
  }

 private:
  std::string name_;
  double worst_ = std::numeric_limits<double>::infinity();
  long cases_ = 0;
};

// A point of X, sometimes pushed onto a face so boundaries get exercised.
Vector random_feasible(Eigen::Index dim, double cap, std::mt19937_64& gen) {
  Vector x = sample_capped_simplex(dim, cap, gen);
  std::uniform_int_distribution<int> mode(0, 4);
  switch (mode(gen)) {
    case 0:
      x *= cap / std::max(x.sum(), 1e-300);  // on the cap face
      break;
    case 1: {
      std::uniform_int_distribution<Eigen::Index> pick(0, dim - 1);
      x[pick(gen)] = 0.0;  // on a coordinate face
      break;
    }
    default:
      break;
  }
  return x;
}

Vector random_score(Eigen::Index dim, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> shift(-2.0, 3.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double scales[] = {0.1, 1.0, 5.0};
  std::uniform_int_distribution<int> pick(0, 2);
  const double c = shift(gen);
  const double s = scales[pick(gen)];
  Vector y(dim);
  for (Eigen::Index i = 0; i < dim; ++i) y[i] = c + s * unit(gen);
  return y;
}

double norm_matched(const Vector& v, const Regularizer& reg) { return primal_norm(v, reg); }

void geometry_for(const Regularizer& base, const GeometryOptions& o, std::mt19937_64& gen,
                  std::vector<CheckResult>& out) {
  const long dim = base.dimension;
  const std::string tag = fmt::format("{} D={}", to_string(base.kind), dim);
  const double tol = o.tolerance;
  std::uniform_real_distribution<double> cap_dist(0.5, 2.0);
  std::uniform_real_distribution<double> eps_dist(0.4, 1.0);

  Tally projection("projection optimality " + tag);
  Tally feasibility("mirror-map feasibility " + tag);
  Tally strong("Prop. 2(1) coupling lower bound " + tag);
  Tally smooth("Prop. 2(2) coupling descent bound " + tag);
  Tally nonneg("Fenchel coupling nonnegativity " + tag);
  Tally lipschitz("coupling Lipschitz bound " + tag);
  Tally conj("conjugate gradient equals mirror map " + tag);

  for (long c = 0; c < o.cases; ++c) {
    Regularizer reg = base;
    reg.cap = cap_dist(gen);
    if (reg.kind == RegularizerKind::SmoothedEntropy) reg.epsilon = eps_dist(gen);
    const GeometryConstants k = geometry_constants(reg);
    const double cap = reg.cap;

    // Projection: the variational inequality <y - p, z - p> <= 0 at every
    // vertex z of X is equivalent to optimality; also compare to a random z.
    {
      const Vector y = random_score(dim, gen);
      const Vector p = project_capped_simplex(y, cap);
      double worst = (y - p).dot(-p);
      for (Eigen::Index i = 0; i < dim; ++i) {
        worst = std::max(worst, (y - p).dot(cap * Vector::Unit(dim, i) - p));
      }
      const Vector z = random_feasible(dim, cap, gen);
      const double dist_slack = (y - z).norm() - (y - p).norm();
      const double feas = in_feasible_set(p, cap, tol) ? 0.0 : -1.0;
      projection.add(std::min({tol - worst, dist_slack + tol, feas}));
    }

    const Vector y = random_score(dim, gen);
    const Vector phi = mirror_map(y, reg);
    {
      const double excess = std::max(-phi.minCoeff(), phi.sum() - cap);
      feasibility.add(1e-9 - excess);
    }

    const Vector p = random_feasible(dim, cap, gen);
    const double f_py = fenchel_coupling(p, y, reg);
    nonneg.add(f_py + tol);
    {
      const double dist = norm_matched(phi - p, reg);
      strong.add(f_py - 0.5 * k.strong_convexity_K * dist * dist + tol);
    }
    {
      std::uniform_real_distribution<double> step(-1.0, 1.0);
      const double scale = std::pow(10.0, std::uniform_real_distribution<double>(-3.0, 0.5)(gen));
      Vector y2 = y;
      for (Eigen::Index i = 0; i < dim; ++i) y2[i] += scale * step(gen);
      const double dn = dual_norm(y2 - y, reg);
      const double bound =
          f_py + (phi - p).dot(y2 - y) + dn * dn / (2.0 * k.strong_convexity_K);
      smooth.add(bound - fenchel_coupling(p, y2, reg) + tol);
    }
    {
      // Score taken in the image of grad psi, where the steepness bound
      // controls both terms of the coupling difference.
      const Vector x1 = random_feasible(dim, cap, gen);
      const Vector x2 = random_feasible(dim, cap, gen);
      const Vector ys = regularizer_gradient(random_feasible(dim, cap, gen), reg);
      const double diff = std::abs(fenchel_coupling(x1, ys, reg) - fenchel_coupling(x2, ys, reg));
      lipschitz.add(2.0 * k.steepness_L_psi * norm_matched(x1 - x2, reg) - diff + tol);
    }
    if (c % 10 == 0) {
      const double h = 1e-5;
      Vector fd(dim);
      Vector yy = y;
      for (Eigen::Index i = 0; i < dim; ++i) {
        yy[i] = y[i] + h;
        const double up = conjugate_value(yy, reg);
        yy[i] = y[i] - h;
        const double down = conjugate_value(yy, reg);
        yy[i] = y[i];
        fd[i] = (up - down) / (2.0 * h);
      }
      const double rel = (fd - phi).lpNorm<Eigen::Infinity>() /
                         std::max(1.0, phi.lpNorm<Eigen::Infinity>());
      conj.add(1e-4 - rel);
    }
  }
  if (base.kind == RegularizerKind::Euclidean) out.push_back(projection.result());
  for (const Tally* t : {&feasibility, &strong, &smooth, &nonneg, &lipschitz, &conj}) {
    out.push_back(t->result());
  }
}

double relative_error(const Vector& fd, const Vector& analytic) {
  return (fd - analytic).lpNorm<Eigen::Infinity>() /
         std::max(analytic.lpNorm<Eigen::Infinity>(), 1e-6);
}

template <typename F>
Vector central_gradient(const F& f, const Vector& x, double h) {
  Vector g(x.size());
  Vector z = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    z[i] = x[i] + h;
    const double up = f(z);
    z[i] = x[i] - h;
    const double down = f(z);
    z[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// Interior point of X at distance >= 0.05 cap / D from every face.
Vector interior_point(Eigen::Index dim, double cap, std::mt19937_64& gen) {
  return 0.9 * sample_capped_simplex(dim, cap, gen) +
         Vector::Constant(dim, 0.05 * cap / static_cast<double>(dim));
}

}  // namespace

const char* to_string(VerificationSuite suite) {
  switch (suite) {
    case VerificationSuite::Geometry: return "geometry";
    case VerificationSuite::Gradients: return "gradients";
    case VerificationSuite::Lemma1: return "lemma1";
    case VerificationSuite::Sublinearity: return "sublinearity";
  }
  return "unknown";
}

VerificationSuite verification_suite_from_string(const std::string& name) {
  for (auto s : {VerificationSuite::Geometry, VerificationSuite::Gradients,
                 VerificationSuite::Lemma1, VerificationSuite::Sublinearity}) {
    if (name == to_string(s)) return s;
  }
  throw ConfigError(fmt::format(
      "unknown verification suite '{}' (expected geometry|gradients|lemma1|sublinearity)", name));
}

bool VerificationReport::passed() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string VerificationReport::format() const {
  std::string out;
  for (const auto& c : checks) {
    out += fmt::format("{} {}: margin={:.3e} cases={}", c.passed ? "PASS" : "FAIL", c.name,
                       c.margin, c.cases);
    if (!c.detail.empty()) out += " (" + c.detail + ")";
    out += '\n';
  }
  out += fmt::format("suite {}: {} in {:.1f}s\n", suite, passed() ? "PASS" : "FAIL", seconds);
  return out;
}

VerificationReport verify_geometry(const GeometryOptions& options) {
  const auto start = Clock::now();
  VerificationReport report;
  report.suite = "geometry";
  std::mt19937_64 gen(options.seed);
  for (long dim : options.dimensions) {
    geometry_for(Regularizer::euclidean(1.0, dim), options, gen, report.checks);
    geometry_for(Regularizer::smoothed_entropy(0.5, 1.0, dim), options, gen, report.checks);
  }
  report.seconds = seconds_since(start);
  return report;
}

VerificationReport verify_gradients(const GradientOptions& o) {
  const auto start = Clock::now();
  VerificationReport report;
  report.suite = "gradients";
  std::mt19937_64 gen(o.seed);
  const RngStreams rng(o.seed);
  const DispatchParams dp = make_dispatch_params(20, 10, rng);
  const double slack = o.tolerance;

  Tally loss_true("dispatch loss gradient");
  Tally loss_observed("dispatch observed-loss gradient");
  Tally jac("dispatch constraint Jacobian");
  Tally chain1("h o g chain rule p=1");
  Tally chain2("h o g chain rule p=2");
  Tally chain3("h o g chain rule p=3");
  Tally track_loss("tracking loss gradient");
  Tally track_jac("tracking constraint Jacobian");

  std::uniform_int_distribution<long> slot(1, 2000);
  for (long k = 0; k < o.points; ++k) {
    const RoundRealization round =
        dispatch_generate_round(dp, rng, slot(gen), 0, static_cast<std::uint64_t>(k));
    const Vector x = interior_point(dp.dim, dp.cap, gen);

    loss_true.add(slack - relative_error(
                              central_gradient([&](const Vector& z) { return dispatch_loss(z, round, dp); },
                                               x, o.step),
                              dispatch_loss_gradient(x, round, dp)));
    loss_observed.add(
        slack - relative_error(central_gradient([&](const Vector& z) {
                                 return dispatch_loss(z, round, dp, true);
                               }, x, o.step),
                               dispatch_loss_gradient(x, round, dp, true)));

    const Matrix jx = dispatch_constraint_gradients(x, round, dp);
    const Vector gx = dispatch_constraints(x, round, dp);
    for (Eigen::Index r = 0; r < dp.num_constraints; ++r) {
      auto gr = [&](const Vector& z) { return dispatch_constraints(z, round, dp)[r]; };
      jac.add(slack - relative_error(central_gradient(gr, x, o.step), jx.row(r).transpose()));
      if (std::abs(gx[r]) < 1e-4) continue;  // keep the difference away from the kink at 0
      for (auto [p, tally] : {std::pair{1.0, &chain1}, {2.0, &chain2}, {3.0, &chain3}}) {
        const PenaltyTransform h{p};
        auto hg = [&](const Vector& z) { return penalty_apply(h, gr(z)); };
        tally->add(slack - relative_error(central_gradient(hg, x, o.step),
                                          penalty_chain_gradient(h, gx[r], jx.row(r).transpose())));
      }
    }

    TrackingParams tp = TrackingParams::planar_default();
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector state(tp.state_dim());
    Vector target(tp.state_dim());
    for (Eigen::Index i = 0; i < state.size(); ++i) {
      state[i] = 2.0 * normal(gen);
      target[i] = 2.0 * normal(gen);
    }
    const Vector u = interior_point(tp.control_dim(), tp.cap, gen);
    track_loss.add(slack - relative_error(central_gradient([&](const Vector& z) {
                                            return tracking_loss(z, state, target, tp);
                                          }, u, o.step),
                                          tracking_loss_gradient(u, state, target, tp)));
    const Matrix tj = tracking_constraint_gradients(u, tp);
    for (Eigen::Index r = 0; r < tp.num_constraints(); ++r) {
      auto gr = [&](const Vector& z) { return tracking_constraints(z, tp)[r]; };
      track_jac.add(slack - relative_error(central_gradient(gr, u, o.step), tj.row(r).transpose()));
    }
  }
  for (const Tally* t : {&loss_true, &loss_observed, &jac, &chain1, &chain2, &chain3, &track_loss,
                         &track_jac}) {
    report.checks.push_back(t->result(fmt::format("step {:g}, tolerance {:g}", o.step, o.tolerance)));
  }
  report.seconds = seconds_since(start);
  return report;
}

VerificationReport verify_lemma1(const Lemma1Options& o) {
  const auto start = Clock::now();
  VerificationReport report;
  report.suite = "lemma1";

  for (auto kind : {RegularizerKind::SmoothedEntropy, RegularizerKind::Euclidean}) {
    for (double p : {1.0, 2.0}) {
      ExperimentConfig cfg;
      cfg.name = "lemma1";
      cfg.horizon = o.horizon;
      cfg.warmup = o.warmup;
      cfg.samples = 1;
      cfg.seed = o.seed;
      cfg.algorithm.regularizer = kind;
      cfg.algorithm.power = p;
      cfg.validate();
      const std::string tag = fmt::format("{} p={:g}", to_string(kind), p);

      const GomspConfig gc = make_gomsp_config(cfg);
      GomspLearner learner(gc, Vector::Zero(cfg.dimension()));
      auto env = make_environment(cfg, 0);
      Lemma1Monitor monitor(gc.gamma, gc.alpha, cfg.num_constraints());
      Tally lemma("Lemma 1 dual-to-violation bound " + tag);
      Tally closed("closed-form dual recursion " + tag);
      Tally nonneg("dual nonnegativity " + tag);

      std::vector<Vector> h_history;
      const double decay = 1.0 - gc.alpha * gc.gamma;
      for (long t = 1; t <= cfg.warmup + cfg.horizon; ++t) {
        auto slot = env->reveal(t);
        const Vector h_values = penalty_apply(gc.penalty, slot->constraints(learner.action()));
        const Vector before = learner.dual();
        learner.observe(*slot);
        monitor.record(h_values, before, learner.dual());
        lemma.add(monitor.relative_margin() + o.relative_tolerance);
        nonneg.add(learner.dual().minCoeff());

        h_history.push_back(h_values);
        Vector expected = Vector::Zero(cfg.num_constraints());
        const auto n = static_cast<long>(h_history.size());
        for (long tau = 0; tau < n; ++tau) {
          expected += std::pow(decay, static_cast<double>(n - 1 - tau)) *
                      h_history[static_cast<std::size_t>(tau)];
        }
        expected *= gc.gamma;
        const double scale = std::max(1.0, expected.lpNorm<Eigen::Infinity>());
        closed.add(1e-10 * scale - (expected - learner.dual()).lpNorm<Eigen::Infinity>());
      }
      report.checks.push_back(
          lemma.result(fmt::format("worst absolute margin {:.3e}", monitor.margin())));
      report.checks.push_back(closed.result());
      report.checks.push_back(nonneg.result());
    }
  }
  report.seconds = seconds_since(start);
  return report;
}

ExperimentConfig SublinearityOptions::default_sublinearity_config() {
  ExperimentConfig cfg;
  cfg.name = "sublinearity";
  cfg.dispatch.environment_per_sample = true;
  cfg.write_sample_files = false;
  return cfg;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidInputError("log_log_slope: need at least two matching points");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) {
      throw DomainError("log_log_slope: values must be positive");
    }
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

VerificationReport verify_sublinearity(const SublinearityOptions& o, SublinearityFit* fit_out) {
  const auto start = Clock::now();
  VerificationReport report;
  report.suite = "sublinearity";
  SublinearityFit fit;
  BenchmarkCache cache;
  std::vector<double> ts;
  for (long horizon : o.horizons) {
    ExperimentConfig cfg = o.base;
    cfg.horizon = horizon;
    cfg.samples = o.seeds;
    cfg.seed = o.seed;
    cfg.workers = o.workers;
    const ExperimentResult result = run_experiment(cfg, &cache);
    double hcfit = 0.0;
    double regret = 0.0;
    for (const auto& s : result.samples) {
      hcfit += s.rows.back().hcfit_mean;
      regret += s.record.cum_dynamic_regret;
    }
    fit.horizons.push_back(horizon);
    fit.mean_hcfit.push_back(hcfit / o.seeds);
    fit.mean_regret.push_back(regret / o.seeds);
    ts.push_back(static_cast<double>(horizon));
  }

  auto exponent_check = [&](const char* name, const std::vector<double>& values, double threshold,
                            double& exponent) {
    CheckResult c;
    c.name = name;
    c.cases = static_cast<long>(values.size());
    std::string series;
    for (std::size_t i = 0; i < values.size(); ++i) {
      series += fmt::format("{}T={}: {:.4g}", i ? ", " : "", fit.horizons[i], values[i]);
    }
    try {
      exponent = log_log_slope(ts, values);
      c.margin = threshold - exponent;
      c.passed = c.margin >= 0.0;
      c.detail = fmt::format("exponent {:.4f} vs threshold {:.2f}; {}", exponent, threshold, series);
    } catch (const Error& e) {
      exponent = std::numeric_limits<double>::quiet_NaN();
      c.margin = -std::numeric_limits<double>::infinity();
      c.passed = false;
      c.detail = fmt::format("{}; {}", e.what(), series);
    }
    report.checks.push_back(c);
  };
  exponent_check("hCFit growth exponent", fit.mean_hcfit, o.hcfit_threshold, fit.hcfit_exponent);
  exponent_check("dynamic regret growth exponent", fit.mean_regret, o.regret_threshold,
                 fit.regret_exponent);
  report.seconds = seconds_since(start);
  if (fit_out) *fit_out = fit;
  return report;
}

VerificationReport run_verification(VerificationSuite suite) {
  switch (suite) {
    case VerificationSuite::Geometry: return verify_geometry();
    case VerificationSuite::Gradients: return verify_gradients();
    case VerificationSuite::Lemma1: return verify_lemma1();
    case VerificationSuite::Sublinearity: return verify_sublinearity();
  }
  throw ConfigError("unknown verification suite");
}

}  // namespace gomsp
