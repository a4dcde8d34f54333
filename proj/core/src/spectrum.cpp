#include "sgdlab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>
#include <utility>

#include "json.hpp"
#include "sgdlab/errors.hpp"

namespace sgdlab {
namespace {

using nlohmann::json;

void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

double finite_or_throw(double value, const char* what) {
  if (!std::isfinite(value) || value > std::numeric_limits<double>::max()) {
    throw NumericalError(std::string(what) + " is not representable (degenerate alpha/beta/d?)");
  }
  return value;
}

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace

std::string_view optimum_mode_name(OptimumMode mode) {
  return mode == OptimumMode::kFig1 ? "fig1" : "tight";
}

std::optional<OptimumMode> parse_optimum_mode(std::string_view name) {
  if (name == "fig1") return OptimumMode::kFig1;
  if (name == "tight") return OptimumMode::kTight;
  return std::nullopt;
}

std::string_view distribution_kind_name(DistributionKind kind) {
  return kind == DistributionKind::kGaussian ? "gaussian" : "canonical";
}

std::optional<DistributionKind> parse_distribution_kind(std::string_view name) {
  if (name == "gaussian") return DistributionKind::kGaussian;
  if (name == "canonical") return DistributionKind::kCanonical;
  return std::nullopt;
}

double SpectrumProblem::trace() const {
  return std::accumulate(lambdas.begin(), lambdas.end(), 0.0);
}

double SpectrumProblem::initial_risk() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    acc += lambdas[i] * theta_star[i] * theta_star[i];
  }
  return 0.5 * acc;
}

void SpectrumProblem::validate() const {
  require(!lambdas.empty(), "problem dimension must be at least 1");
  if (theta_star.size() != lambdas.size()) {
    throw DimensionMismatch("theta_star has " + std::to_string(theta_star.size()) +
                            " entries, expected " + std::to_string(lambdas.size()));
  }
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    require(std::isfinite(lambdas[i]) && lambdas[i] > 0.0,
            "eigenvalues must be finite and strictly positive");
    require(std::isfinite(theta_star[i]), "theta_star must be finite");
    if (i > 0) require(lambdas[i] <= lambdas[i - 1], "eigenvalues must be non-increasing");
  }
}

SpectrumProblem build_power_law(std::size_t d, double alpha, double beta,
                                OptimumMode mode, double eps) {
  require(d >= 1, "dimension must be at least 1");
  require(alpha >= 0.0 && alpha < 1.0, "alpha must lie in [0, 1)");
  require(beta > -1.0, "beta must be greater than -1");
  if (mode == OptimumMode::kTight) require(eps > 0.0, "tight optimum mode needs eps > 0");

  SpectrumProblem problem;
  problem.alpha = alpha;
  problem.beta = beta;
  problem.optimum_mode = mode;
  problem.eps = mode == OptimumMode::kTight ? eps : 0.0;
  problem.lambdas.resize(d);
  problem.theta_star.resize(d);

  const double decay = 1.0 / (1.0 - alpha);
  const double source = beta / (1.0 - alpha);
  const double theta_exponent = mode == OptimumMode::kFig1
                                    ? -(1.0 - source) / 2.0
                                    : -(1.0 + source + eps) / 2.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double i = static_cast<double>(k + 1);
    problem.lambdas[k] = std::pow(i, -decay);
    problem.theta_star[k] = std::pow(i, theta_exponent);
  }
  problem.validate();
  return problem;
}

std::string problem_to_json(const SpectrumProblem& problem) {
  json doc = {
      {"d", problem.dim()},
      {"alpha", problem.alpha},
      {"beta", problem.beta},
      {"lambdas", problem.lambdas},
      {"theta_star", problem.theta_star},
      {"optimum_mode", std::string(optimum_mode_name(problem.optimum_mode))},
      {"eps", problem.eps},
  };
  return doc.dump(2);
}

SpectrumProblem problem_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("problem JSON does not parse: ") + e.what());
  }
  require(doc.is_object(), "problem JSON must be an object");
  static const std::set<std::string> kKeys = {"d",          "alpha",        "beta", "lambdas",
                                              "theta_star", "optimum_mode", "eps"};
  for (const auto& [key, _] : doc.items()) {
    require(kKeys.contains(key), "unknown key in problem JSON: " + key);
  }
  for (const char* key : {"d", "lambdas", "theta_star"}) {
    require(doc.contains(key), std::string("problem JSON lacks key: ") + key);
  }

  SpectrumProblem problem;
  try {
    problem.lambdas = doc.at("lambdas").get<std::vector<double>>();
    problem.theta_star = doc.at("theta_star").get<std::vector<double>>();
    problem.alpha = doc.value("alpha", 0.0);
    problem.beta = doc.value("beta", 0.0);
    problem.eps = doc.value("eps", 0.0);
    const auto mode = parse_optimum_mode(doc.value("optimum_mode", std::string("fig1")));
    require(mode.has_value(), "optimum_mode must be \"fig1\" or \"tight\"");
    problem.optimum_mode = *mode;
    const auto d = doc.at("d").get<std::size_t>();
    if (d != problem.lambdas.size()) {
      throw DimensionMismatch("d = " + std::to_string(d) + " but lambdas has " +
                              std::to_string(problem.lambdas.size()) + " entries");
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed problem JSON: ") + e.what());
  }
  problem.validate();
  return problem;
}

FeatureDistribution FeatureDistribution::gaussian(const SpectrumProblem& problem) {
  problem.validate();
  FeatureDistribution dist;
  dist.kind_ = DistributionKind::kGaussian;
  dist.lambdas_ = problem.lambdas;
  dist.stddevs_.reserve(problem.dim());
  for (double lambda : problem.lambdas) dist.stddevs_.push_back(std::sqrt(lambda));
  return dist;
}

FeatureDistribution FeatureDistribution::canonical(const SpectrumProblem& problem,
                                                   double prob_exponent) {
  problem.validate();
  require(std::isfinite(prob_exponent), "probability exponent must be finite");
  const std::size_t d = problem.dim();
  std::vector<double> weights(d);
  for (std::size_t i = 0; i < d; ++i) {
    weights[i] = finite_or_throw(std::pow(problem.lambdas[i], prob_exponent),
                                 "lambda_i^prob_exponent");
  }
  const double total = finite_or_throw(std::accumulate(weights.begin(), weights.end(), 0.0),
                                       "sum of canonical weights");
  FeatureDistribution dist;
  dist.kind_ = DistributionKind::kCanonical;
  dist.lambdas_ = problem.lambdas;
  dist.prob_exponent_ = prob_exponent;
  dist.probs_.resize(d);
  dist.scales_.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    dist.probs_[i] = weights[i] / total;
    require(dist.probs_[i] > 0.0, "canonical probability underflowed to zero");
    dist.scales_[i] = std::sqrt(problem.lambdas[i] / dist.probs_[i]);
  }
  return dist;
}

FeatureDistribution FeatureDistribution::canonical_atoms(const SpectrumProblem& problem,
                                                         std::vector<double> probs,
                                                         std::vector<double> scales) {
  problem.validate();
  if (probs.size() != problem.dim() || scales.size() != problem.dim()) {
    throw DimensionMismatch("canonical atoms must have one probability and scale per eigenvalue");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    require(probs[i] > 0.0 && std::isfinite(probs[i]), "atom probabilities must be positive");
    require(scales[i] > 0.0 && std::isfinite(scales[i]), "atom scales must be positive");
    require(close_rel(probs[i] * scales[i] * scales[i], problem.lambdas[i], 1e-12),
            "atoms must satisfy p_i s_i^2 = lambda_i");
    total += probs[i];
  }
  require(std::abs(total - 1.0) <= 1e-12, "atom probabilities must sum to 1");
  FeatureDistribution dist;
  dist.kind_ = DistributionKind::kCanonical;
  dist.lambdas_ = problem.lambdas;
  dist.probs_ = std::move(probs);
  dist.scales_ = std::move(scales);
  return dist;
}

FeatureDistribution make_distribution(const SpectrumProblem& problem, DistributionKind kind,
                                      std::optional<double> prob_exponent) {
  if (kind == DistributionKind::kGaussian) return FeatureDistribution::gaussian(problem);
  return FeatureDistribution::canonical(problem, prob_exponent.value_or(1.0 - problem.alpha));
}

double log_moment_constant(const FeatureDistribution& dist, double lambda_o) {
  const auto lambdas = dist.lambdas();
  require(lambda_o >= lambdas.front(), "lambda_o must be at least lambda_max");
  if (dist.kind() == DistributionKind::kGaussian) {
    // E[<x,Ax> xx^T] = H tr(AH) + 2 HAH with A = ln(lambda_o H^{-1}).
    double trace_term = 0.0;
    double top = 0.0;
    for (double lambda : lambdas) {
      const double weighted = lambda * std::log(lambda_o / lambda);
      trace_term += weighted;
      top = std::max(top, weighted);
    }
    return trace_term + 2.0 * top;
  }
  // Only the sampled atom contributes: p_i s_i^4 A_ii <= R_ln lambda_i.
  double worst = 0.0;
  const auto probs = dist.probs();
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    worst = std::max(worst, lambdas[i] / probs[i] * std::log(lambda_o / lambdas[i]));
  }
  return worst;
}

double select_lambda_o(const SpectrumProblem& problem, const FeatureDistribution& dist) {
  problem.validate();
  if (dist.dim() != problem.dim()) throw DimensionMismatch("distribution and problem differ in d");
  double lambda_o = std::numbers::e * problem.lambda_max();
  for (int doubling = 0; doubling <= 200; ++doubling) {
    const double r_ln = log_moment_constant(dist, lambda_o);
    if (!std::isfinite(r_ln)) break;
    if (7.0 * r_ln <= lambda_o) return lambda_o;
    lambda_o *= 2.0;
  }
  throw NumericalError("no lambda_o with 7 R_ln <= lambda_o within 200 doublings");
}

ProblemConstants compute_constants(const SpectrumProblem& problem,
                                   const FeatureDistribution& dist, double alpha, double beta,
                                   std::optional<double> lambda_o) {
  problem.validate();
  if (dist.dim() != problem.dim()) throw DimensionMismatch("distribution and problem differ in d");
  require(alpha >= 0.0 && alpha < 1.0, "alpha must lie in [0, 1)");
  require(beta > -1.0, "beta must be greater than -1");

  const auto& lambdas = problem.lambdas;
  const auto& theta = problem.theta_star;
  const std::size_t d = problem.dim();

  ProblemConstants c;
  c.alpha = alpha;
  c.beta = beta;
  c.distribution_kind = dist.kind();
  c.trace_H = problem.trace();
  c.lambda_max = problem.lambda_max();
  c.lambda_min = problem.lambda_min();
  c.lambda_o = lambda_o ? *lambda_o : select_lambda_o(problem, dist);
  c.R_ln = log_moment_constant(dist, c.lambda_o);

  if (dist.kind() == DistributionKind::kGaussian) {
    double trace_power = 0.0;
    for (double lambda : lambdas) trace_power += std::pow(lambda, 1.0 - alpha);
    c.R = c.trace_H + 2.0 * c.lambda_max;
    c.R_alpha = trace_power + 2.0 * std::pow(c.lambda_max, 1.0 - alpha);
  } else {
    const auto probs = dist.probs();
    for (std::size_t i = 0; i < d; ++i) {
      c.R = std::max(c.R, lambdas[i] / probs[i]);
      c.R_alpha = std::max(c.R_alpha, std::pow(lambdas[i], 1.0 - alpha) / probs[i]);
    }
  }

  for (std::size_t i = 0; i < d; ++i) {
    const double m0 = theta[i] * theta[i];
    c.norm_theta_sq += m0;
    c.C_ln += m0 * std::log(c.lambda_o / lambdas[i]);
    c.C_beta += beta == 0.0 ? m0 : std::pow(lambdas[i], -beta) * m0;
  }

  for (double value : {c.trace_H, c.norm_theta_sq, c.R, c.lambda_o, c.R_ln, c.R_alpha, c.C_ln,
                       c.C_beta}) {
    finite_or_throw(value, "problem constant");
  }
  return c;
}

}  // namespace sgdlab
