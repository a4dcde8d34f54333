#include "verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "commands.hpp"
#include "lemma_grids.hpp"
#include "sgdlab/analysis.hpp"
#include "sgdlab/bounds.hpp"
#include "sgdlab/propagator.hpp"
#include "sgdlab/runner.hpp"

namespace sgdlab::cli {
namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double rel_gap(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

struct Outcome {
  bool passed;
  std::string detail;
};

Outcome oracle_equivalence() {
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> dim(1, 6);
  std::uniform_int_distribution<int> steps(1, 200);
  std::uniform_real_distribution<double> log_lambda(-4.0, 0.0);
  std::uniform_real_distribution<double> q(0.0, 1.5);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  int problems = 0;
  for (DistributionKind kind : {DistributionKind::kGaussian, DistributionKind::kCanonical}) {
    for (int k = 0; k < 20; ++k) {
      const auto d = static_cast<std::size_t>(dim(rng));
      const std::int64_t horizon = steps(rng);
      SpectrumProblem p;
      for (std::size_t i = 0; i < d; ++i) {
        p.lambdas.push_back(std::exp(log_lambda(rng)));
        p.theta_star.push_back(normal(rng));
      }
      std::sort(p.lambdas.rbegin(), p.lambdas.rend());
      const FeatureDistribution dist = kind == DistributionKind::kGaussian
                                           ? FeatureDistribution::gaussian(p)
                                           : FeatureDistribution::canonical(p, q(rng));
      const double gamma = 1.0 / (4.0 * p.lambda_max());
      const auto full = propagate_full_oracle(p, dist, gamma, horizon);
      DiagonalPropagator prop(p, dist, gamma);
      for (std::int64_t t = 1; t <= horizon; ++t) {
        prop.step();
        const auto m = prop.moments();
        for (std::size_t i = 0; i < d; ++i) {
          const auto ii = static_cast<Eigen::Index>(i);
          worst = std::max(worst, rel_gap(static_cast<double>(m[i]), full[static_cast<std::size_t>(t)](ii, ii)));
        }
      }
      ++problems;
    }
  }
  return {worst <= 1e-10, std::to_string(problems) + " problems, max rel err " + sci(worst)};
}

Outcome monte_carlo_consistency(unsigned threads) {
  std::string detail;
  bool ok = true;
  for (DistributionKind kind : {DistributionKind::kGaussian, DistributionKind::kCanonical}) {
    const SpectrumProblem p = build_power_law(10, 0.5, 0.0, OptimumMode::kTight);
    const FeatureDistribution dist = make_distribution(p, kind);
    const double gamma = 1.0 / (2.0 * p.trace());
    PathConfig cfg;
    cfg.gamma = gamma;
    cfg.horizon = 1000;
    cfg.replicates = 2000;
    cfg.base_seed = 7;
    cfg.checkpoints = log_checkpoints(1000);
    cfg.threads = threads;
    const RiskCurve mc = run_paths(p, dist, cfg).front();
    const RiskCurve exact = propagate_diagonal(p, dist, gamma, 1000, cfg.checkpoints,
                                               {.allow_large_gamma = true});
    double worst_z = 0.0;
    double worst_rel = 0.0;
    int outside = 0;
    int precise = 0;
    for (std::size_t i = 0; i < mc.size(); ++i) {
      const double diff = std::abs(mc.values[i] - exact.values[i]);
      const double se = mc.stderrs[i];
      if (diff > 4.0 * se + 1e-12 * exact.values[i]) ++outside;
      if (se > 0.0) worst_z = std::max(worst_z, diff / se);
      if (se <= 0.01 * mc.values[i]) {
        ++precise;
        const double rel = diff / exact.values[i];
        worst_rel = std::max(worst_rel, rel);
        if (rel > 0.05) ++outside;
      }
    }
    ok = ok && outside == 0;
    detail += std::string(distribution_kind_name(kind)) + ": max |z| " + sci(worst_z) +
              ", max rel " + sci(worst_rel) + " over " + std::to_string(precise) +
              " precise checkpoints, " + std::to_string(outside) + " failures; ";
  }
  return {ok, detail};
}

Outcome closed_form_d1() {
  const SpectrumProblem p = build_power_law(1, 0.5, 0.0, OptimumMode::kTight);
  const FeatureDistribution dist = make_distribution(p, DistributionKind::kCanonical);
  const double gamma = 0.5;
  std::vector<std::int64_t> cps(1000);
  for (std::int64_t t = 1; t <= 1000; ++t) cps[static_cast<std::size_t>(t - 1)] = t;
  PathConfig cfg;
  cfg.gamma = gamma;
  cfg.horizon = 1000;
  cfg.replicates = 1;
  cfg.checkpoints = cps;
  const RiskCurve sim = run_paths(p, dist, cfg).front();
  const RiskCurve exact =
      propagate_diagonal(p, dist, gamma, 1000, cps, {.allow_large_gamma = true});
  double sim_err = 0.0, prop_err = 0.0, prop_rel = 0.0;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const double truth = static_cast<double>(
        0.5L * std::pow(1.0L - static_cast<long double>(gamma), 2.0L * static_cast<long double>(cps[i])));
    sim_err = std::max(sim_err, std::abs(sim.values[i] - truth));
    prop_err = std::max(prop_err, std::abs(exact.values[i] - truth));
    if (truth > 1e-300) prop_rel = std::max(prop_rel, rel_gap(exact.values[i], truth));
  }
  return {sim_err <= 1e-12 && prop_err <= 1e-12,
          "max abs err simulated " + sci(sim_err) + ", propagated " + sci(prop_err) +
              " (propagated max rel " + sci(prop_rel) + ")"};
}

Outcome rate_slope(std::size_t d, double alpha, double beta, std::int64_t lo, std::int64_t hi,
                   double min_slope, double max_slope) {
  const SpectrumProblem p = build_power_law(d, alpha, beta, OptimumMode::kTight);
  const FeatureDistribution dist = FeatureDistribution::gaussian(p);
  const double gamma = 1.0 / (2.0 * p.trace());
  const auto cps = log_checkpoints(hi, 64);
  const RiskCurve exact = propagate_diagonal(p, dist, gamma, hi, cps, {.allow_large_gamma = true});
  const SlopeFit fit = fit_loglog_slope(exact, lo, hi);
  return {fit.slope >= min_slope && fit.slope <= max_slope,
          "slope " + sci(fit.slope) + " +- " + sci(fit.stderr_slope) + " over [" +
              std::to_string(fit.t_lo) + ", " + std::to_string(fit.t_hi) + "], target [" +
              sci(min_slope) + ", " + sci(max_slope) + "]"};
}

Outcome bound_dominance() {
  bool ok = true;
  int cases = 0;
  double worst = std::numeric_limits<double>::infinity();
  std::string worst_case;
  std::string failures;
  const auto cps = log_checkpoints(10000, 64);
  for (double alpha : {0.25, 0.5, 0.75}) {
    for (double beta : {0.0, 0.5, 1.0}) {
      const SpectrumProblem p = build_power_law(200, alpha, beta, OptimumMode::kTight);
      const FeatureDistribution dist = make_distribution(p, DistributionKind::kCanonical);
      const ProblemConstants k = compute_constants(p, dist, alpha, beta);
      std::vector<Theorem> theorems = {Theorem::kThm3};
      if (beta == 0.0) {
        theorems.push_back(Theorem::kThm1);
        theorems.push_back(Theorem::kThm2);
      }
      for (Theorem th : theorems) {
        const TheoremCheck check = check_theorem(p, dist, k, th, 10000, cps);
        ++cases;
        const double margin = check.report.min_margin;
        const std::string label = std::string(theorem_name(th)) + "(a=" + sci(alpha) +
                                  ",b=" + sci(beta) + ")";
        if (margin < worst) {
          worst = margin;
          worst_case = label;
        }
        if (!check.spec.certified || check.report.violating_t) {
          ok = false;
          failures += " " + label;
        }
      }
    }
  }
  return {ok, std::to_string(cases) + " cases, smallest min_margin " + sci(worst) + " at " +
                  worst_case + (failures.empty() ? "" : ", failing:" + failures)};
}

Outcome lemma2_trajectories() {
  int cases = 0;
  int violations = 0;
  double worst_rel = std::numeric_limits<double>::infinity();
  for (DistributionKind kind : {DistributionKind::kGaussian, DistributionKind::kCanonical}) {
    for (double alpha : {0.25, 0.5, 0.75}) {
      for (double beta : {0.0, 1.0}) {
        for (std::size_t d : {10, 50}) {
          const SpectrumProblem p = build_power_law(d, alpha, beta, OptimumMode::kTight);
          const FeatureDistribution dist = make_distribution(p, kind);
          const ProblemConstants k = compute_constants(p, dist, alpha, beta);
          const double cap = 1.0 / (4.0 * p.lambda_max());
          for (double gamma : {cap, cap / 8.0}) {
            const Lemma2Result r = lemma2_check(p, dist, k.R, gamma, 1000);
            ++cases;
            if (r.violating_t) ++violations;
            worst_rel = std::min(worst_rel, r.min_rel_margin);
          }
        }
      }
    }
  }
  return {violations == 0, std::to_string(cases) + " trajectories x 1000 steps, " +
                               std::to_string(violations) + " violations, min relative margin " +
                               sci(worst_rel)};
}

Outcome lemma_suites() {
  const LemmaGridReport report = run_lemma_grids();
  const double xi1 = xi_alpha(1.0);
  const double xi3 = xi_alpha(3.0);
  const double pi = 3.14159265358979323846;
  const double e1 = std::abs(xi1 - pi * pi / 6.0);
  const double e3 = std::abs(xi3 - std::pow(pi, 4) / 90.0);
  std::string detail;
  for (const LemmaSummary& s : report.summaries) {
    detail += s.lemma + " " + std::to_string(s.cases) + " cases min " + sci(s.min_margin) +
              (s.violations ? " (" + std::to_string(s.violations) + " violations)" : "") + "; ";
  }
  detail += "S_T asymmetry " + sci(report.lemma5_max_asymmetry) + "; |xi_1 - pi^2/6| " + sci(e1) +
            ", |xi_3 - pi^4/90| " + sci(e3);
  return {report.all_nonnegative() && report.lemma5_max_asymmetry <= 1e-12 && e1 <= 1e-10 &&
              e3 <= 1e-10,
          detail};
}

Outcome linear_regime(unsigned threads) {
  const SpectrumProblem p = build_power_law(30, 0.5, 0.0, OptimumMode::kTight);
  const FeatureDistribution dist = FeatureDistribution::gaussian(p);
  const double gamma = 1.0 / (2.0 * p.trace());
  const RiskCurve exact = propagate_diagonal(p, dist, gamma, 1'000'000,
                                             log_checkpoints(1'000'000, 256),
                                             {.allow_large_gamma = true});
  const TransitionResult tr = linear_regime_transition(exact, gamma, p.lambda_min());
  std::string detail = "tau_predicted " + sci(tr.tau_predicted);
  if (!tr.tau_detected) return {false, detail + ", no transition detected"};
  const double ratio = *tr.tau_detected / tr.tau_predicted;
  detail += ", tau_detected " + sci(*tr.tau_detected) + " (ratio " + sci(ratio) + ")";
  bool ok = ratio >= 0.1 && ratio <= 10.0;

  // Past the trigger, the last-iterate slope keeps steepening.
  const auto windows = dyadic_slopes(exact);
  bool steepening = true;
  double previous = 0.0;
  bool started = false;
  double last_gap = 0.0;
  for (const WindowSlope& w : windows) {
    if (w.t_lo < tr.window->t_lo) continue;
    if (started && !(w.local_slope < previous)) steepening = false;
    previous = w.local_slope;
    started = true;
    if (w.reference_slope) last_gap = *w.reference_slope - w.local_slope;
  }
  ok = ok && steepening && last_gap > 1.0;
  detail += ", last-iterate slope " + sci(previous) + " in final window (" +
            (steepening ? "monotone" : "NOT monotone") + ")";

  PathConfig cfg;
  cfg.gamma = gamma;
  cfg.horizon = 100'000;
  cfg.replicates = 20;
  cfg.base_seed = 9;
  cfg.checkpoints = log_checkpoints(100'000, 256);
  cfg.track = {Series::kAveraged};
  cfg.threads = threads;
  const RiskCurve averaged = run_paths(p, dist, cfg).front();
  const auto avg_windows = dyadic_slopes(averaged);
  const auto it = std::find_if(avg_windows.begin(), avg_windows.end(), [&](const WindowSlope& w) {
    return w.t_lo == tr.window->t_lo;
  });
  if (it == avg_windows.end()) return {false, detail + ", averaged curve lacks the window"};
  ok = ok && !is_steepening(*it);
  detail += "; averaged slope in [" + std::to_string(it->t_lo) + ", " + std::to_string(it->t_hi) +
            ") is " + sci(it->local_slope) + " vs reference " +
            sci(it->reference_slope.value_or(std::nan(""))) +
            (is_steepening(*it) ? " (steepens)" : " (no steepening)");
  return {ok, detail};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() /
                        ("sgdlab_verify_" + std::to_string(std::random_device{}()));
  fs::create_directories(root);
  const ExperimentConfig prop = parse_config(R"({
    "problem": {"d": 50, "alpha": 0.5, "beta": 0.5, "optimum_mode": "tight"},
    "distribution": {"kind": "canonical"},
    "gamma": {"mode": "half_inv_trace"},
    "horizon": 2000, "checkpoints": {"count": 40, "scale": "log"},
    "outputs": {"csv_path": "propagate.csv"}})");
  const ExperimentConfig sim = parse_config(R"({
    "problem": {"d": 20, "alpha": 0.5, "beta": 0, "optimum_mode": "tight"},
    "distribution": {"kind": "gaussian"},
    "gamma": {"mode": "half_inv_trace"},
    "horizon": 2000, "replicates": 40, "base_seed": 123456789,
    "series": ["last", "averaged", "running_min"],
    "outputs": {"csv_path": "simulate.csv"}})");
  std::ostringstream sink;
  bool ok = true;
  std::string detail;
  for (int run = 0; run < 2; ++run) {
    CommandOptions opts;
    opts.out_dir = root / ("run" + std::to_string(run));
    opts.threads = run == 0 ? 1 : 3;
    cmd_propagate(prop, opts, sink);
    cmd_simulate(sim, opts, sink);
  }
  for (const char* file : {"propagate.csv", "simulate.csv"}) {
    const std::string a = read_file(root / "run0" / file);
    const std::string b = read_file(root / "run1" / file);
    const bool same = !a.empty() && a == b;
    ok = ok && same;
    detail += std::string(file) + (same ? " identical" : " DIFFERS") + " (" +
              std::to_string(a.size()) + " bytes); ";
  }
  detail += "second run used 3 threads";
  std::error_code ec;
  fs::remove_all(root, ec);
  return {ok, detail};
}

struct CriterionDef {
  int id;
  const char* name;
  std::optional<double> limit;
};

constexpr CriterionDef kCriteria[] = {
    {1, "oracle equivalence (full covariance vs diagonal recursion)", 10.0},
    {2, "Monte Carlo consistency with the exact propagator", 120.0},
    {3, "closed form in d = 1, canonical law", std::nullopt},
    {4, "rate slope alpha=0.5 beta=0 in [-1.1, -0.9]", 60.0},
    {5, "rate slope alpha=0.75 beta=1 in [-1.95, -1.55]", 120.0},
    {6, "bound dominance for the three theorems", 120.0},
    {7, "Lyapunov recursion along exact trajectories", std::nullopt},
    {8, "appendix lemma grids and xi values", std::nullopt},
    {9, "linear-regime transition scale", std::nullopt},
    {10, "byte-identical CSV on rerun", std::nullopt},
};

Outcome dispatch(int id, unsigned threads) {
  switch (id) {
    case 1: return oracle_equivalence();
    case 2: return monte_carlo_consistency(threads);
    case 3: return closed_form_d1();
    case 4: return rate_slope(2000, 0.5, 0.0, 1000, 100'000, -1.1, -0.9);
    case 5: return rate_slope(300, 0.75, 1.0, 1000, 1'000'000, -1.95, -1.55);
    case 6: return bound_dominance();
    case 7: return lemma2_trajectories();
    case 8: return lemma_suites();
    case 9: return linear_regime(threads);
    case 10: return determinism();
    default: return {false, "unknown criterion"};
  }
}

}  // namespace

CriterionResult run_criterion(int id, unsigned threads) {
  CriterionResult result;
  result.id = id;
  for (const CriterionDef& def : kCriteria) {
    if (def.id == id) {
      result.name = def.name;
      result.time_limit = def.limit;
    }
  }
  const auto start = std::chrono::steady_clock::now();
  try {
    const Outcome o = dispatch(id, std::max(1u, threads));
    result.passed = o.passed;
    result.detail = o.detail;
  } catch (const std::exception& e) {
    result.passed = false;
    result.detail = std::string("exception: ") + e.what();
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (result.time_limit && result.seconds > *result.time_limit) {
    result.passed = false;
    result.detail += "; exceeded time limit of " + sci(*result.time_limit) + " s";
  }
  return result;
}

std::vector<CriterionResult> run_acceptance(VerifyLevel level, unsigned threads,
                                            std::ostream* out) {
  std::vector<int> ids;
  if (level == VerifyLevel::kQuick) {
    ids = {1, 3, 7, 8, 10};
  } else {
    for (const CriterionDef& def : kCriteria) ids.push_back(def.id);
  }
  std::vector<CriterionResult> results;
  for (int id : ids) {
    results.push_back(run_criterion(id, threads));
    if (out) *out << format_result(results.back()) << std::endl;
  }
  return results;
}

std::string format_result(const CriterionResult& r) {
  char seconds[32];
  std::snprintf(seconds, sizeof seconds, "%.2f s", r.seconds);
  return std::string(r.passed ? "PASS" : "FAIL") + " [" + std::to_string(r.id) + "] " + r.name +
         ": " + r.detail + " (" + seconds + ")";
}

}  // namespace sgdlab::cli
