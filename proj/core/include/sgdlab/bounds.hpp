#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "sgdlab/curve.hpp"
#include "sgdlab/spectrum.hpp"

namespace sgdlab {

enum class Theorem {
  kThm1,  // ln(T)/T under the fourth-moment condition
  kThm2,  // 1/T under log-regularity of features and optimum
  kThm3,  // 1/T^{1+min(alpha,beta)} under capacity and source conditions
};

std::string_view theorem_name(Theorem theorem);
std::optional<Theorem> parse_theorem(std::string_view name);
Series bound_series(Theorem theorem);
std::optional<Theorem> theorem_of(Series series);

/// sum_{n>=1} n^{-(1+alpha)} to relative error 1e-10. The tail past the
/// partial sum is bracketed by the trapezoid and midpoint integrals of the
/// convex summand and the midpoint of that bracket is used.
double xi_alpha(double alpha);

/// Smallest T the theorem is stated for (2 for thm1, 3 otherwise).
std::int64_t min_horizon(Theorem theorem);

/// thm1: (4 R ln T)^{-1}; thm2: (14 R_ln)^{-1};
/// thm3: min((32 xi_alpha R_alpha)^{-1/(1-alpha)}, 1/(4 lambda_max)).
double step_size_for(Theorem theorem, const ProblemConstants& constants, double alpha,
                     std::int64_t horizon);

/// Whether gamma meets the theorem's step-size clause. thm1 and thm2 fix
/// gamma (accepted within 1e-12 relative); thm3 needs
/// gamma^{1-alpha} <= (32 xi_alpha R_alpha)^{-1} and gamma <= 1/(4 lambda_max).
bool step_size_admissible(Theorem theorem, const ProblemConstants& constants, double gamma,
                          std::int64_t horizon);

/// thm1: 3 R |theta*|^2 ln T / T;  thm2: 10 R_ln C_ln / T;
/// thm3: 2 C_beta ((1+beta)/gamma)^{1+beta} / T^{1+min(alpha,beta)}.
/// thm3 reads alpha and beta from `constants`.
double bound_value(Theorem theorem, const ProblemConstants& constants, double gamma,
                   std::int64_t horizon);

struct BoundSpec {
  Theorem theorem = Theorem::kThm3;
  ProblemConstants constants;
  double gamma = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double xi_alpha = 0.0;  // thm3 only, 0 otherwise
  bool certified = true;  // false when gamma was forced by the caller
};

/// Prescribed step size unless `forced_gamma` is given, which clears
/// `certified`.
BoundSpec make_bound_spec(Theorem theorem, const ProblemConstants& constants,
                          std::int64_t horizon,
                          std::optional<double> forced_gamma = std::nullopt);

/// S_n(x) = sum_{k=0}^{n-1} (1-x)^k / (n-k).
double s_n_exact(double x, std::int64_t n);

/// 7 ln(1/x) / n - x S_n(x); nonnegative for x in (0, 1/4], n >= 1.
double lemma3_check(double x, std::int64_t n);

/// r^r / t^r - x^r (1-x)^t; nonnegative for x in (0,1), t >= 1, r > 0.
double lemma4_check(double x, double t, double r);

/// S_T(a, b) = sum_{t=1}^{T-1} 1 / (t^{1+b} (T-t)^{1+a}), as a literal sum.
/// Requires 2 <= T <= 1e6 and a, b > -1.
double s_t_sum(double a, double b, std::int64_t horizon);

struct Lemma5Result {
  double s_t = 0.0;
  double bound = 0.0;   // 2^{2 + min(a,b)} xi_{max(a,b)} / T^{1 + min(a,b)}
  double margin = 0.0;  // bound - s_t
};

/// Requires alpha in (0,1), beta > -1, 2 <= T <= 1e6.
Lemma5Result lemma5_exact_and_check(double alpha, double beta, std::int64_t horizon);

struct Lemma2Result {
  double min_margin = 0.0;      // min_t rhs_t - f_t
  double min_rel_margin = 0.0;  // min_t (rhs_t - f_t) / rhs_t
  std::optional<std::int64_t> violating_t;
};

/// Checks f_t <= tr(M_0)/(4 gamma t) + gamma R sum_{k<t} f_k/(t-k) for
/// t = 1..T along the exact diagonal recursion, f_t being the exact risk.
/// Requires gamma in (0, 1/(4 lambda_max)], T <= 1000 and d <= 50.
Lemma2Result lemma2_check(const SpectrumProblem& problem, const FeatureDistribution& dist,
                          double R, double gamma, std::int64_t horizon);

}  // namespace sgdlab
