#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <vector>

#include "csv.hpp"
#include "lemma_grids.hpp"
#include "sgdlab/analysis.hpp"
#include "sgdlab/bounds.hpp"
#include "sgdlab/propagator.hpp"
#include "sgdlab/runner.hpp"
#include "svg.hpp"

namespace sgdlab::cli {
namespace {

std::filesystem::path resolve(const CommandOptions& options, const std::string& path) {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p : options.out_dir / p;
}

std::string run_id_or(const ExperimentConfig& config, const char* fallback) {
  return config.run_id.empty() ? fallback : config.run_id;
}

void write_outputs(const ExperimentConfig& config, const CommandOptions& options,
                   const char* command, const std::vector<LabeledCurve>& curves,
                   const SpectrumProblem& problem, const SvgOptions& svg, std::ostream& log) {
  const auto csv_path =
      resolve(options, config.csv_path.empty() ? std::string(command) + ".csv" : config.csv_path);
  write_text_file(csv_path, render_csv(curves));
  log << "wrote " << csv_path.string() << "\n";
  if (config.svg_path) {
    std::vector<const RiskCurve*> ptrs;
    for (const LabeledCurve& c : curves) ptrs.push_back(c.curve);
    const auto svg_path = resolve(options, *config.svg_path);
    write_text_file(svg_path, render_svg(ptrs, svg));
    log << "wrote " << svg_path.string() << "\n";
  }
  write_text_file(options.out_dir / "problem.json", problem_to_json(problem) + "\n");
}

double checked_gamma(const ExperimentConfig& config, const CommandOptions& options,
                     const SpectrumProblem& problem, const FeatureDistribution& dist) {
  const ResolvedGamma g = resolve_gamma(config, problem, dist);
  if (g.exceeds_cap && config.gamma_mode == GammaMode::kExplicit && !options.force_gamma) {
    throw ConfigError("gamma exceeds 1/(4 lambda_max); pass --force-gamma to run anyway");
  }
  return g.gamma;
}

SvgOptions titled(const char* title) {
  SvgOptions svg;
  svg.title = title;
  return svg;
}

std::string describe(const SlopeFit& fit) {
  return "slope " + format_double(fit.slope) + " over [" + std::to_string(fit.t_lo) + ", " +
         std::to_string(fit.t_hi) + "] (" + std::to_string(fit.n_points) + " points)";
}

}  // namespace

void cmd_propagate(const ExperimentConfig& config, const CommandOptions& options,
                   std::ostream& log) {
  for (Series s : config.series) {
    if (s != Series::kExact) throw ConfigError("propagate only produces the 'exact' series");
  }
  const SpectrumProblem problem = build_problem(config);
  const FeatureDistribution dist = build_distribution(config, problem);
  const double gamma = checked_gamma(config, options, problem, dist);
  const auto checkpoints = log_checkpoints(config.horizon, config.checkpoint_count);
  const RiskCurve exact = propagate_diagonal(problem, dist, gamma, config.horizon, checkpoints,
                                             {.allow_large_gamma = true});
  log << "propagate: gamma = " << format_double(gamma) << ", final risk "
      << format_double(exact.values.back()) << "\n";
  write_outputs(config, options, "propagate", {{run_id_or(config, "propagate"), &exact}},
                problem, titled("exact expected risk"), log);
}

void cmd_simulate(const ExperimentConfig& config, const CommandOptions& options,
                  std::ostream& log) {
  std::vector<Series> mc;
  bool want_exact = false;
  for (Series s : config.series) {
    if (s == Series::kExact) {
      want_exact = true;
    } else if (s == Series::kLast || s == Series::kAveraged || s == Series::kRunningMin) {
      mc.push_back(s);
    } else {
      throw ConfigError("simulate series must be among last, averaged, running_min, exact");
    }
  }
  if (mc.empty()) mc.push_back(Series::kLast);

  const SpectrumProblem problem = build_problem(config);
  const FeatureDistribution dist = build_distribution(config, problem);
  const double gamma = checked_gamma(config, options, problem, dist);

  PathConfig path;
  path.gamma = gamma;
  path.horizon = config.horizon;
  path.replicates = config.replicates;
  path.base_seed = options.seed.value_or(config.base_seed);
  path.checkpoints = log_checkpoints(config.horizon, config.checkpoint_count);
  path.track = mc;
  path.threads = std::max(1u, options.threads);
  if (options.rotate) path.rotation = random_rotation(problem.dim(), path.base_seed);

  std::vector<RiskCurve> curves = run_paths(problem, dist, path);
  if (want_exact) {
    curves.push_back(propagate_diagonal(problem, dist, gamma, config.horizon, path.checkpoints,
                                        {.allow_large_gamma = true}));
  }
  const std::string run_id = run_id_or(config, "simulate");
  std::vector<LabeledCurve> labeled;
  for (const RiskCurve& c : curves) labeled.push_back({run_id, &c});
  log << "simulate: gamma = " << format_double(gamma) << ", replicates " << config.replicates
      << ", seed " << path.base_seed << (options.rotate ? ", rotated" : "") << "\n";
  write_outputs(config, options, "simulate", labeled, problem, titled("SGD risk"), log);
}

void cmd_bounds(const ExperimentConfig& config, const CommandOptions& options,
                std::ostream& log) {
  std::vector<Theorem> theorems;
  for (Series s : config.series) {
    if (s == Series::kExact) continue;
    const auto th = theorem_of(s);
    if (!th) throw ConfigError("bounds series must be bound_thm1/2/3 (and optionally exact)");
    theorems.push_back(*th);
  }
  if (theorems.empty()) {
    theorems = {Theorem::kThm1, Theorem::kThm2};
    if (config.alpha > 0.0 && config.alpha < 1.0) theorems.push_back(Theorem::kThm3);
  }
  if (config.gamma_mode == GammaMode::kExplicit && !options.force_gamma) {
    throw ConfigError("an explicit gamma for bounds needs --force-gamma");
  }

  const SpectrumProblem problem = build_problem(config);
  const FeatureDistribution dist = build_distribution(config, problem);
  const ProblemConstants constants = compute_constants(problem, dist, config.alpha, config.beta);
  std::optional<double> forced;
  if (options.force_gamma) forced = resolve_gamma(config, problem, dist).gamma;

  const auto checkpoints = log_checkpoints(config.horizon, config.checkpoint_count);
  const std::string run_id = run_id_or(config, "bounds");
  std::vector<TheoremCheck> checks;
  checks.reserve(theorems.size());
  for (Theorem th : theorems) {
    if (th == Theorem::kThm3 && !(config.alpha > 0.0 && config.alpha < 1.0)) {
      throw ConfigError("thm3 needs alpha in (0,1)");
    }
    try {
      checks.push_back(check_theorem(problem, dist, constants, th, config.horizon, checkpoints,
                                     forced));
    } catch (const NumericalError&) {
      throw;
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string(theorem_name(th)) + ": " + e.what());
    }
  }
  std::vector<std::string> ids;
  for (const TheoremCheck& c : checks) ids.push_back(run_id + "-" + std::string(theorem_name(c.spec.theorem)));
  std::vector<LabeledCurve> labeled;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    labeled.push_back({ids[i], &checks[i].exact});
    labeled.push_back({ids[i], &checks[i].bound});
  }
  for (const TheoremCheck& c : checks) {
    log << theorem_name(c.spec.theorem) << ": gamma " << format_double(c.spec.gamma)
        << (c.spec.certified ? " certified" : " NOT certified (forced gamma)") << ", min_margin "
        << format_double(c.report.min_margin);
    if (c.report.violating_t) log << ", first violation at t = " << *c.report.violating_t;
    log << "\n";
  }
  write_outputs(config, options, "bounds", labeled, problem, titled("risk and bounds"), log);
}

void cmd_fig1(const Fig1Options& fig, const CommandOptions& options, std::ostream& log) {
  const bool left = fig.panel == Panel::kLeft;
  const double alpha = left ? 0.5 : 0.75;
  const double beta = left ? 0.0 : 1.0;
  const SpectrumProblem problem = build_power_law(300, alpha, beta, fig.optimum_mode);
  const FeatureDistribution dist = FeatureDistribution::gaussian(problem);
  const double gamma = 1.0 / (2.0 * problem.trace());

  PathConfig path;
  path.gamma = gamma;
  path.horizon = fig.horizon;
  path.replicates = fig.replicates;
  path.base_seed = options.seed.value_or(0);
  path.checkpoints = log_checkpoints(fig.horizon, fig.checkpoint_count);
  path.track = {Series::kLast, Series::kAveraged};
  path.threads = std::max(1u, options.threads);
  if (options.rotate) path.rotation = random_rotation(problem.dim(), path.base_seed);

  std::vector<RiskCurve> curves = run_paths(problem, dist, path);
  curves.push_back(propagate_diagonal(problem, dist, gamma, fig.horizon, path.checkpoints,
                                      {.allow_large_gamma = true}));
  const RiskCurve& exact = curves.back();

  SvgOptions svg;
  const std::string name = left ? "fig1_left" : "fig1_right";
  svg.title = std::string(left ? "alpha = 0.5, beta = 0" : "alpha = 0.75, beta = 1") +
              ", d = 300, gamma = 1/(2 tr H)";
  const TransitionResult transition =
      linear_regime_transition(exact, gamma, problem.lambda_min());
  if (left) {
    svg.marker_t = transition.tau_predicted;
  } else {
    // Guide curve c / t^{1 + min(alpha, beta)} through the exact curve at t ~ 1e3.
    const double rate = 1.0 + std::min(alpha, beta);
    std::size_t anchor = 0;
    while (anchor + 1 < exact.size() && exact.checkpoints[anchor] < 1000) ++anchor;
    const double c = exact.values[anchor] *
                     std::pow(static_cast<double>(exact.checkpoints[anchor]), rate);
    RiskCurve ref;
    ref.series = Series::kReference;
    ref.checkpoints = exact.checkpoints;
    for (std::int64_t t : ref.checkpoints) ref.values.push_back(c / std::pow(static_cast<double>(t), rate));
    curves.push_back(std::move(ref));
  }

  std::vector<LabeledCurve> labeled;
  std::vector<const RiskCurve*> ptrs;
  for (const RiskCurve& c : curves) {
    labeled.push_back({name, &c});
    ptrs.push_back(&c);
  }
  write_text_file(options.out_dir / (name + ".csv"), render_csv(labeled));
  write_text_file(options.out_dir / (name + ".svg"), render_svg(ptrs, svg));
  write_text_file(options.out_dir / (name + "_problem.json"), problem_to_json(problem) + "\n");

  log << name << ": gamma = " << format_double(gamma) << ", optimum "
      << optimum_mode_name(fig.optimum_mode) << ", replicates " << fig.replicates << ", T "
      << fig.horizon << "\n";
  log << "  tau_predicted = " << format_double(transition.tau_predicted);
  if (transition.tau_detected) log << ", tau_detected = " << format_double(*transition.tau_detected);
  log << "\n";
  const std::int64_t lo = std::min<std::int64_t>(1000, fig.horizon / 10);
  const std::int64_t hi = left ? std::min<std::int64_t>(fig.horizon, static_cast<std::int64_t>(transition.tau_predicted))
                               : fig.horizon;
  for (const RiskCurve& c : curves) {
    if (c.series == Series::kReference) continue;
    try {
      log << "  " << series_name(c.series) << ": " << describe(fit_loglog_slope(c, lo, hi)) << "\n";
    } catch (const InvalidArgument& e) {
      log << "  " << series_name(c.series) << ": no slope (" << e.what() << ")\n";
    }
  }
  log << "wrote " << (options.out_dir / (name + ".csv")).string() << " and .svg\n";
}

bool cmd_lemmas(const CommandOptions& options, std::ostream& log) {
  const LemmaGridReport report = run_lemma_grids();
  std::string csv = "lemma,x,n,r,alpha,beta,value,margin\n";
  for (const LemmaRow& row : report.rows) {
    csv += row.lemma + "," + format_double(row.x) + "," + std::to_string(row.n) + "," +
           format_double(row.r) + "," + format_double(row.alpha) + "," +
           format_double(row.beta) + "," + format_double(row.value) + "," +
           format_double(row.margin) + "\n";
  }
  write_text_file(options.out_dir / "lemmas.csv", csv);
  for (const LemmaSummary& s : report.summaries) {
    log << s.lemma << ": " << s.cases << " cases, min margin " << format_double(s.min_margin)
        << (s.violations == 0 ? ", all nonnegative" : ", VIOLATIONS: " + std::to_string(s.violations))
        << "\n";
  }
  log << "wrote " << (options.out_dir / "lemmas.csv").string() << "\n";
  return report.all_nonnegative();
}

}  // namespace sgdlab::cli
