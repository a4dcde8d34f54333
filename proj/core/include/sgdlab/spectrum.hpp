#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sgdlab {

enum class OptimumMode {
  kFig1,   // theta*_i = i^{-(1 - beta/(1-alpha))/2}
  kTight,  // theta*_i = i^{-(1 + beta/(1-alpha) + eps)/2}, summable C_beta
};

std::string_view optimum_mode_name(OptimumMode mode);
std::optional<OptimumMode> parse_optimum_mode(std::string_view name);

/// A synthetic noiseless least-squares problem stored in the eigenbasis of
/// the covariance H. Entry i of `lambdas` is the i-th largest eigenvalue and
/// entry i of `theta_star` the coordinate of the optimum along v_i.
struct SpectrumProblem {
  std::vector<double> lambdas;
  std::vector<double> theta_star;
  double alpha = 0.0;  // capacity exponent (metadata)
  double beta = 0.0;   // source exponent (metadata)
  OptimumMode optimum_mode = OptimumMode::kFig1;
  double eps = 0.0;

  std::size_t dim() const { return lambdas.size(); }
  double lambda_max() const { return lambdas.front(); }
  double lambda_min() const { return lambdas.back(); }
  double trace() const;
  /// Risk of theta = 0, i.e. half of sum_i lambda_i theta*_i^2.
  double initial_risk() const;

  /// Throws InvalidArgument unless d >= 1, lambdas are finite, positive and
  /// non-increasing, and theta_star has matching length.
  void validate() const;
};

/// lambda_i = i^{-1/(1-alpha)} for i = 1..d and theta* per `mode`.
SpectrumProblem build_power_law(std::size_t d, double alpha, double beta,
                                OptimumMode mode, double eps = 0.01);

std::string problem_to_json(const SpectrumProblem& problem);
SpectrumProblem problem_from_json(std::string_view text);

enum class DistributionKind { kGaussian, kCanonical };

std::string_view distribution_kind_name(DistributionKind kind);
std::optional<DistributionKind> parse_distribution_kind(std::string_view name);

/// Law of the features x with E[xx^T] = H.
///
/// Gaussian: x = sum_i sqrt(lambda_i) g_i v_i with g_i iid standard normal.
/// Canonical atoms: x = s_i v_i with probability p_i, where p_i s_i^2 = lambda_i.
class FeatureDistribution {
 public:
  static FeatureDistribution gaussian(const SpectrumProblem& problem);

  /// p_i proportional to lambda_i^q, s_i = sqrt(lambda_i / p_i).
  static FeatureDistribution canonical(const SpectrumProblem& problem,
                                       double prob_exponent);

  /// Explicit atoms; rejected unless sum p = 1 and p_i s_i^2 = lambda_i
  /// (both to 1e-12 relative).
  static FeatureDistribution canonical_atoms(const SpectrumProblem& problem,
                                             std::vector<double> probs,
                                             std::vector<double> scales);

  DistributionKind kind() const { return kind_; }
  std::size_t dim() const { return lambdas_.size(); }
  std::span<const double> lambdas() const { return lambdas_; }
  /// Canonical only; empty for the Gaussian law.
  std::span<const double> probs() const { return probs_; }
  std::span<const double> scales() const { return scales_; }
  /// Gaussian only: coordinate standard deviations sqrt(lambda_i).
  std::span<const double> stddevs() const { return stddevs_; }
  /// Exponent q the canonical probabilities were built with, if any.
  std::optional<double> prob_exponent() const { return prob_exponent_; }

 private:
  DistributionKind kind_ = DistributionKind::kGaussian;
  std::vector<double> lambdas_;
  std::vector<double> probs_;
  std::vector<double> scales_;
  std::vector<double> stddevs_;
  std::optional<double> prob_exponent_;
};

/// Canonical default exponent is 1 - problem.alpha.
FeatureDistribution make_distribution(const SpectrumProblem& problem,
                                      DistributionKind kind,
                                      std::optional<double> prob_exponent = std::nullopt);

/// Smallest assumption constants valid for a (problem, distribution) pair.
struct ProblemConstants {
  double trace_H = 0.0;
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  double norm_theta_sq = 0.0;
  double R = 0.0;        // E[|x|^2 xx^T] <= R H
  double lambda_o = 0.0;
  double R_ln = 0.0;     // E[<x, ln(lambda_o H^{-1}) x> xx^T] <= R_ln H
  double R_alpha = 0.0;  // E[<x, H^{-alpha} x> xx^T] <= R_alpha H
  double C_ln = 0.0;     // sum_i theta*_i^2 ln(lambda_o / lambda_i)
  double C_beta = 0.0;   // sum_i lambda_i^{-beta} theta*_i^2
  double alpha = 0.0;
  double beta = 0.0;
  DistributionKind distribution_kind = DistributionKind::kGaussian;
};

/// Log-regularity constant R_ln evaluated at a given reference lambda_o
/// (which must be >= lambda_max so that ln(lambda_o H^{-1}) is PSD).
double log_moment_constant(const FeatureDistribution& dist, double lambda_o);

/// First lambda_o = e * lambda_max * 2^k (k = 0, 1, ...) with
/// 7 R_ln(lambda_o) <= lambda_o. Throws NumericalError after 200 doublings.
double select_lambda_o(const SpectrumProblem& problem, const FeatureDistribution& dist);

/// When `lambda_o` is absent it is chosen by select_lambda_o.
ProblemConstants compute_constants(const SpectrumProblem& problem,
                                   const FeatureDistribution& dist, double alpha,
                                   double beta,
                                   std::optional<double> lambda_o = std::nullopt);

}  // namespace sgdlab
