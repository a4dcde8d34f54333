#include "sgdlab/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sgdlab/errors.hpp"

namespace sgdlab {
namespace {

constexpr long double kDoubleMax = std::numeric_limits<double>::max();

void check_gamma(const SpectrumProblem& problem, double gamma, bool allow_large_gamma) {
  if (!std::isfinite(gamma) || gamma < 0.0) {
    throw InvalidArgument("step size must be finite and nonnegative");
  }
  const double cap = 1.0 / (4.0 * problem.lambda_max());
  if (!allow_large_gamma && gamma > cap * (1.0 + 1e-12)) {
    throw InvalidArgument("step size exceeds 1/(4 lambda_max); pass the override to allow it");
  }
}

double relative_gap(long double a, long double b) {
  const long double scale = std::max(std::fabs(a), std::fabs(b));
  if (scale == 0.0L) return 0.0;
  return static_cast<double>(std::fabs(a - b) / scale);
}

}  // namespace

std::vector<double> f_terms(const FeatureDistribution& dist, std::span<const double> m) {
  if (m.size() != dist.dim()) throw DimensionMismatch("moment vector has the wrong length");
  for (double v : m) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("moments must be finite and >= 0");
  }
  const auto lambdas = dist.lambdas();
  std::vector<double> f(m.size());
  if (dist.kind() == DistributionKind::kGaussian) {
    double weighted = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) weighted += lambdas[j] * m[j];
    for (std::size_t i = 0; i < m.size(); ++i) {
      f[i] = lambdas[i] * weighted + 2.0 * lambdas[i] * lambdas[i] * m[i];
    }
  } else {
    const auto probs = dist.probs();
    for (std::size_t i = 0; i < m.size(); ++i) {
      f[i] = lambdas[i] * lambdas[i] / probs[i] * m[i];
    }
  }
  return f;
}

DiagonalPropagator::DiagonalPropagator(const SpectrumProblem& problem,
                                       const FeatureDistribution& dist, double gamma,
                                       bool allow_large_gamma)
    : kind_(dist.kind()), gamma_(gamma) {
  problem.validate();
  if (dist.dim() != problem.dim()) throw DimensionMismatch("distribution and problem differ in d");
  check_gamma(problem, gamma, allow_large_gamma);
  const std::size_t d = problem.dim();
  lambdas_.assign(dist.lambdas().begin(), dist.lambdas().end());
  if (kind_ == DistributionKind::kCanonical) {
    probs_.assign(dist.probs().begin(), dist.probs().end());
  }
  m_.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    const long double theta = problem.theta_star[i];
    m_[i] = theta * theta;
  }
  weighted_ = 0.0L;
  for (std::size_t i = 0; i < d; ++i) weighted_ += lambdas_[i] * m_[i];
}

void DiagonalPropagator::compute_f() {
  const std::size_t d = m_.size();
  f_.resize(d);
  if (kind_ == DistributionKind::kGaussian) {
    for (std::size_t i = 0; i < d; ++i) {
      f_[i] = lambdas_[i] * weighted_ + 2.0L * lambdas_[i] * lambdas_[i] * m_[i];
    }
  } else {
    for (std::size_t i = 0; i < d; ++i) f_[i] = lambdas_[i] * lambdas_[i] / probs_[i] * m_[i];
  }
}

void DiagonalPropagator::step() {
  compute_f();
  const long double g = gamma_;
  const long double g2 = g * g;
  long double weighted = 0.0L;
  for (std::size_t i = 0; i < m_.size(); ++i) {
    m_[i] = m_[i] - 2.0L * g * lambdas_[i] * m_[i] + g2 * f_[i];
    weighted += lambdas_[i] * m_[i];
  }
  ++t_;
  // The trace is recomputed from scratch every step rather than updated.
  weighted_ = weighted;
  if (!std::isfinite(weighted_) || std::fabs(weighted_) > kDoubleMax) {
    throw DivergenceError(t_);
  }
}

double DiagonalPropagator::risk() const {
  const long double value = 0.5L * weighted_;
  if (!std::isfinite(value) || std::fabs(value) > kDoubleMax) throw DivergenceError(t_);
  return static_cast<double>(value);
}

RiskCurve propagate_diagonal(const SpectrumProblem& problem, const FeatureDistribution& dist,
                             double gamma, std::int64_t horizon,
                             std::span<const std::int64_t> checkpoints,
                             PropagateOptions options) {
  if (horizon < 1) throw InvalidArgument("horizon must be at least 1");
  validate_checkpoints(checkpoints, horizon);
  DiagonalPropagator prop(problem, dist, gamma, options.allow_large_gamma);
  RiskCurve curve;
  curve.series = Series::kExact;
  curve.checkpoints.assign(checkpoints.begin(), checkpoints.end());
  curve.values.reserve(checkpoints.size());
  std::size_t next = 0;
  while (next < checkpoints.size()) {
    prop.step();
    if (prop.t() == checkpoints[next]) {
      curve.values.push_back(prop.risk());
      ++next;
    }
  }
  return curve;
}

ClosedFormReport closed_form_check(const SpectrumProblem& problem,
                                   const FeatureDistribution& dist, double gamma,
                                   std::int64_t horizon, bool allow_large_gamma) {
  if (horizon < 1 || horizon > 1000) throw InvalidArgument("closed_form_check needs 1 <= T <= 1000");
  if (problem.dim() > 50) throw InvalidArgument("closed_form_check needs d <= 50");

  DiagonalPropagator prop(problem, dist, gamma, allow_large_gamma);
  const std::size_t d = problem.dim();
  const auto steps = static_cast<std::size_t>(horizon);
  std::vector<long double> m0(prop.moments().begin(), prop.moments().end());
  std::vector<std::vector<long double>> f_hist;
  std::vector<std::vector<long double>> m_hist;
  f_hist.reserve(steps);
  m_hist.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    prop.step();
    f_hist.emplace_back(prop.last_f().begin(), prop.last_f().end());
    m_hist.emplace_back(prop.moments().begin(), prop.moments().end());
  }

  ClosedFormReport report;
  const long double g = gamma;
  for (std::size_t i = 0; i < d; ++i) {
    const long double rho = 1.0L - 2.0L * g * static_cast<long double>(problem.lambdas[i]);
    // powers[k] = rho^k
    std::vector<long double> powers(steps + 1, 1.0L);
    for (std::size_t k = 1; k <= steps; ++k) powers[k] = powers[k - 1] * rho;
    for (std::size_t t = 1; t <= steps; ++t) {
      long double unrolled = powers[t] * m0[i];
      long double shifted = powers[t - 1] * m0[i];
      for (std::size_t k = 0; k < t; ++k) {
        unrolled += g * g * powers[t - 1 - k] * f_hist[k][i];
        shifted += g * g * powers[t - 1 - k] * f_hist[k][i];
      }
      const long double iterated = m_hist[t - 1][i];
      report.max_rel_discrepancy = std::max(report.max_rel_discrepancy,
                                            relative_gap(unrolled, iterated));
      report.shifted_form_discrepancy = std::max(report.shifted_form_discrepancy,
                                                 relative_gap(shifted, iterated));
    }
  }
  return report;
}

std::vector<Eigen::MatrixXd> propagate_full_oracle(const SpectrumProblem& problem,
                                                   const FeatureDistribution& dist,
                                                   double gamma, std::int64_t horizon) {
  problem.validate();
  if (dist.dim() != problem.dim()) throw DimensionMismatch("distribution and problem differ in d");
  if (problem.dim() > 8 || horizon > 500) {
    throw InvalidArgument("full oracle instance too large (needs d <= 8 and T <= 500)");
  }
  if (horizon < 0) throw InvalidArgument("horizon must be nonnegative");
  if (!std::isfinite(gamma) || gamma < 0.0) throw InvalidArgument("step size must be >= 0");

  const auto n = static_cast<Eigen::Index>(problem.dim());
  const Eigen::Map<const Eigen::VectorXd> lambda(problem.lambdas.data(), n);
  const Eigen::Map<const Eigen::VectorXd> theta(problem.theta_star.data(), n);
  const Eigen::MatrixXd h = lambda.asDiagonal();
  const Eigen::MatrixXd contraction = Eigen::MatrixXd::Identity(n, n) - gamma * h;

  std::vector<Eigen::MatrixXd> history;
  history.reserve(static_cast<std::size_t>(horizon) + 1);
  history.push_back(theta * theta.transpose());
  for (std::int64_t t = 0; t < horizon; ++t) {
    const Eigen::MatrixXd& m = history.back();
    Eigen::MatrixXd fourth(n, n);
    if (dist.kind() == DistributionKind::kGaussian) {
      fourth = h * (m * h).trace() + 2.0 * h * m * h;
    } else {
      fourth.setZero();
      const auto probs = dist.probs();
      const auto scales = dist.scales();
      for (Eigen::Index i = 0; i < n; ++i) {
        const double s2 = scales[static_cast<std::size_t>(i)] * scales[static_cast<std::size_t>(i)];
        fourth(i, i) = probs[static_cast<std::size_t>(i)] * s2 * s2 * m(i, i);
      }
    }
    Eigen::MatrixXd next =
        contraction * m * contraction + gamma * gamma * (fourth - h * m * h);
    if (!next.allFinite()) throw DivergenceError(t + 1);
    history.push_back(std::move(next));
  }
  return history;
}

}  // namespace sgdlab
