#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sgdlab/curve.hpp"
#include "sgdlab/spectrum.hpp"

namespace sgdlab {

/// Mixing terms f_i = E[<v_i, x>^2 x^T M x] for a covariance M whose
/// diagonal in the eigenbasis is `m`. Closed under the diagonal for both
/// supported laws:
///   Gaussian:  f_i = lambda_i (sum_j lambda_j m_j) + 2 lambda_i^2 m_i
///   canonical: f_i = (lambda_i^2 / p_i) m_i
std::vector<double> f_terms(const FeatureDistribution& dist, std::span<const double> m);

/// Step-by-step exact second-moment recursion
///   m_i <- m_i - 2 gamma lambda_i m_i + gamma^2 f_i
/// started from m_i = theta*_i^2. State is held in long double.
class DiagonalPropagator {
 public:
  /// Rejects gamma > 1/(4 lambda_max) unless `allow_large_gamma`.
  DiagonalPropagator(const SpectrumProblem& problem, const FeatureDistribution& dist,
                     double gamma, bool allow_large_gamma = false);

  /// Advances one step. Throws DivergenceError if the state leaves the
  /// double range.
  void step();

  std::int64_t t() const { return t_; }
  double gamma() const { return gamma_; }
  /// Exact expected risk f_t = 1/2 sum_i lambda_i m_i^t.
  double risk() const;
  std::span<const long double> moments() const { return m_; }
  /// Mixing terms f_i^{t-1} used by the most recent step (empty at t = 0).
  std::span<const long double> last_f() const { return f_; }

 private:
  void compute_f();

  std::vector<long double> lambdas_;
  std::vector<long double> probs_;
  std::vector<long double> m_;
  std::vector<long double> f_;
  long double weighted_ = 0.0L;  // sum_i lambda_i m_i for the current state
  DistributionKind kind_;
  double gamma_;
  std::int64_t t_ = 0;
};

struct PropagateOptions {
  bool allow_large_gamma = false;
};

/// Exact expected last-iterate risk at each checkpoint (series = exact).
RiskCurve propagate_diagonal(const SpectrumProblem& problem, const FeatureDistribution& dist,
                             double gamma, std::int64_t horizon,
                             std::span<const std::int64_t> checkpoints,
                             PropagateOptions options = {});

struct ClosedFormReport {
  /// Max over (i, t) of |unrolled - iterated| / max(|unrolled|, |iterated|).
  double max_rel_discrepancy = 0.0;
  /// Same comparison against the summed form with the exponent and upper
  /// summation index shifted by one, i.e.
  ///   m^{t+1} = (1-2 gamma lambda)^t m^0 + gamma^2 sum_{k=0}^{t} (1-2 gamma lambda)^{t-k} f^k.
  double shifted_form_discrepancy = 0.0;
};

/// Compares the iterated recursion with its unrolled sum
///   m^t = (1-2 gamma lambda)^t m^0 + gamma^2 sum_{k<t} (1-2 gamma lambda)^{t-1-k} f^k.
/// Requires horizon <= 1000 and d <= 50.
ClosedFormReport closed_form_check(const SpectrumProblem& problem,
                                   const FeatureDistribution& dist, double gamma,
                                   std::int64_t horizon, bool allow_large_gamma = false);

/// Full covariance recursion
///   M <- (I - gamma H) M (I - gamma H) + gamma^2 (E[x^T M x xx^T] - H M H)
/// from M_0 = theta* theta*^T, with the fourth moment taken in closed form.
/// Returns M_0..M_T. Requires d <= 8 and horizon <= 500.
std::vector<Eigen::MatrixXd> propagate_full_oracle(const SpectrumProblem& problem,
                                                   const FeatureDistribution& dist,
                                                   double gamma, std::int64_t horizon);

}  // namespace sgdlab
