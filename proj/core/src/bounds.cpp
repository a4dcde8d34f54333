#include "sgdlab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sgdlab/errors.hpp"
#include "sgdlab/propagator.hpp"

namespace sgdlab {
namespace {

constexpr double kXiTolerance = 1e-11;  // target for the certified half-width
constexpr std::int64_t kMaxLemma5Horizon = 1'000'000;

void require(bool condition, const char* message) {
  if (!condition) throw InvalidArgument(message);
}

// Integral of x^{-(1+alpha)} over [a, inf).
long double tail_integral(long double a, long double alpha) {
  return std::pow(a, -alpha) / alpha;
}

struct TailBracket {
  long double lower;
  long double upper;
};

// Bracket for sum_{n > N} n^{-(1+alpha)}.
TailBracket tail_bracket(std::int64_t n, long double alpha) {
  const long double next = static_cast<long double>(n) + 1.0L;
  const long double f_next = std::pow(next, -(1.0L + alpha));
  return {tail_integral(next, alpha) + 0.5L * f_next,
          tail_integral(next - 0.5L, alpha)};
}

double check_finite(double value, const char* what) {
  if (!std::isfinite(value)) throw NumericalError(std::string(what) + " is not finite");
  return value;
}

}  // namespace

std::string_view theorem_name(Theorem theorem) {
  switch (theorem) {
    case Theorem::kThm1: return "thm1";
    case Theorem::kThm2: return "thm2";
    case Theorem::kThm3: return "thm3";
  }
  return "thm3";
}

std::optional<Theorem> parse_theorem(std::string_view name) {
  if (name == "thm1") return Theorem::kThm1;
  if (name == "thm2") return Theorem::kThm2;
  if (name == "thm3") return Theorem::kThm3;
  return std::nullopt;
}

Series bound_series(Theorem theorem) {
  switch (theorem) {
    case Theorem::kThm1: return Series::kBoundThm1;
    case Theorem::kThm2: return Series::kBoundThm2;
    case Theorem::kThm3: return Series::kBoundThm3;
  }
  return Series::kBoundThm3;
}

std::optional<Theorem> theorem_of(Series series) {
  switch (series) {
    case Series::kBoundThm1: return Theorem::kThm1;
    case Series::kBoundThm2: return Theorem::kThm2;
    case Series::kBoundThm3: return Theorem::kThm3;
    default: return std::nullopt;
  }
}

double xi_alpha(double alpha) {
  require(std::isfinite(alpha) && alpha > 0.0, "xi_alpha needs alpha > 0");
  const long double a = alpha;
  // The bracket width behaves like (1+a) N^{-(2+a)} / 8; start near the
  // predicted size and double until the certified half-width is small enough.
  std::int64_t n = 16;
  TailBracket bracket = tail_bracket(n, a);
  while (true) {
    // The partial sum is at least 1, so an absolute target is conservative.
    if (0.5L * (bracket.upper - bracket.lower) <= kXiTolerance) break;
    if (n > (std::int64_t{1} << 40)) throw NumericalError("xi_alpha failed to converge");
    n *= 2;
    bracket = tail_bracket(n, a);
  }
  long double partial = 0.0L;
  for (std::int64_t k = n; k >= 1; --k) {
    partial += std::pow(static_cast<long double>(k), -(1.0L + a));
  }
  return static_cast<double>(partial + 0.5L * (bracket.lower + bracket.upper));
}

std::int64_t min_horizon(Theorem theorem) { return theorem == Theorem::kThm1 ? 2 : 3; }

double step_size_for(Theorem theorem, const ProblemConstants& constants, double alpha,
                     std::int64_t horizon) {
  if (horizon < min_horizon(theorem)) {
    throw InvalidArgument(std::string(theorem_name(theorem)) + " needs T >= " +
                          std::to_string(min_horizon(theorem)));
  }
  switch (theorem) {
    case Theorem::kThm1:
      require(constants.R > 0.0, "thm1 needs R > 0");
      return 1.0 / (4.0 * constants.R * std::log(static_cast<double>(horizon)));
    case Theorem::kThm2:
      require(constants.R_ln > 0.0, "thm2 needs R_ln > 0");
      return 1.0 / (14.0 * constants.R_ln);
    case Theorem::kThm3: {
      require(alpha > 0.0 && alpha < 1.0, "thm3 needs alpha in (0,1)");
      require(constants.R_alpha > 0.0, "thm3 needs R_alpha > 0");
      const double cap = std::pow(32.0 * xi_alpha(alpha) * constants.R_alpha,
                                  -1.0 / (1.0 - alpha));
      return std::min(cap, 1.0 / (4.0 * constants.lambda_max));
    }
  }
  return 0.0;
}

bool step_size_admissible(Theorem theorem, const ProblemConstants& constants, double gamma,
                          std::int64_t horizon) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) return false;
  if (horizon < min_horizon(theorem)) return false;
  switch (theorem) {
    case Theorem::kThm1:
    case Theorem::kThm2: {
      const double prescribed = step_size_for(theorem, constants, constants.alpha, horizon);
      return std::abs(gamma - prescribed) <= 1e-12 * prescribed;
    }
    case Theorem::kThm3: {
      const double alpha = constants.alpha;
      if (!(alpha > 0.0 && alpha < 1.0)) return false;
      const double lhs = std::pow(gamma, 1.0 - alpha);
      const double rhs = 1.0 / (32.0 * xi_alpha(alpha) * constants.R_alpha);
      return lhs <= rhs * (1.0 + 1e-12) &&
             gamma <= (1.0 + 1e-12) / (4.0 * constants.lambda_max);
    }
  }
  return false;
}

double bound_value(Theorem theorem, const ProblemConstants& constants, double gamma,
                   std::int64_t horizon) {
  if (horizon < min_horizon(theorem)) {
    throw InvalidArgument(std::string(theorem_name(theorem)) + " needs T >= " +
                          std::to_string(min_horizon(theorem)));
  }
  const double t = static_cast<double>(horizon);
  switch (theorem) {
    case Theorem::kThm1:
      return check_finite(3.0 * constants.R * constants.norm_theta_sq * std::log(t) / t,
                          "thm1 bound");
    case Theorem::kThm2:
      return check_finite(10.0 * constants.R_ln * constants.C_ln / t, "thm2 bound");
    case Theorem::kThm3: {
      require(gamma > 0.0, "thm3 bound needs gamma > 0");
      const double beta = constants.beta;
      const double rate = 1.0 + std::min(constants.alpha, beta);
      // Evaluated in logs: ((1+beta)/gamma)^{1+beta} overflows quickly.
      const double log_value = std::log(2.0 * constants.C_beta) +
                               (1.0 + beta) * std::log((1.0 + beta) / gamma) -
                               rate * std::log(t);
      return check_finite(std::exp(log_value), "thm3 bound");
    }
  }
  return 0.0;
}

BoundSpec make_bound_spec(Theorem theorem, const ProblemConstants& constants,
                          std::int64_t horizon, std::optional<double> forced_gamma) {
  BoundSpec spec;
  spec.theorem = theorem;
  spec.constants = constants;
  spec.alpha = constants.alpha;
  spec.beta = constants.beta;
  if (theorem == Theorem::kThm3) spec.xi_alpha = xi_alpha(constants.alpha);
  if (forced_gamma) {
    require(std::isfinite(*forced_gamma) && *forced_gamma > 0.0,
            "forced step size must be positive");
    if (horizon < min_horizon(theorem)) {
      throw InvalidArgument(std::string(theorem_name(theorem)) + " needs T >= " +
                            std::to_string(min_horizon(theorem)));
    }
    spec.gamma = *forced_gamma;
    spec.certified = false;
  } else {
    spec.gamma = step_size_for(theorem, constants, constants.alpha, horizon);
    spec.certified = true;
  }
  return spec;
}

double s_n_exact(double x, std::int64_t n) {
  require(x > 0.0 && x < 1.0, "S_n needs x in (0,1)");
  require(n >= 1, "S_n needs n >= 1");
  long double sum = 0.0L;
  long double power = 1.0L;
  const long double base = 1.0L - static_cast<long double>(x);
  for (std::int64_t k = 0; k < n; ++k) {
    sum += power / static_cast<long double>(n - k);
    power *= base;
  }
  return static_cast<double>(sum);
}

double lemma3_check(double x, std::int64_t n) {
  require(x > 0.0 && x <= 0.25, "lemma 3 needs x in (0, 1/4]");
  require(n >= 1, "lemma 3 needs n >= 1");
  return 7.0 * std::log(1.0 / x) / static_cast<double>(n) - x * s_n_exact(x, n);
}

double lemma4_check(double x, double t, double r) {
  require(x > 0.0 && x < 1.0, "lemma 4 needs x in (0,1)");
  require(t >= 1.0, "lemma 4 needs t >= 1");
  require(r > 0.0, "lemma 4 needs r > 0");
  const long double lhs = std::exp(static_cast<long double>(r) * std::log(static_cast<long double>(x)) +
                                   static_cast<long double>(t) * std::log1p(-static_cast<long double>(x)));
  const long double rhs = std::pow(static_cast<long double>(r) / static_cast<long double>(t),
                                   static_cast<long double>(r));
  return static_cast<double>(rhs - lhs);
}

double s_t_sum(double a, double b, std::int64_t horizon) {
  require(horizon >= 2 && horizon <= kMaxLemma5Horizon, "S_T needs 2 <= T <= 1e6");
  require(a > -1.0 && b > -1.0, "S_T needs exponents > -1");
  const long double big_t = static_cast<long double>(horizon);
  long double sum = 0.0L;
  for (std::int64_t t = 1; t < horizon; ++t) {
    const long double lt = static_cast<long double>(t);
    sum += std::exp(-(1.0L + b) * std::log(lt) - (1.0L + a) * std::log(big_t - lt));
  }
  return static_cast<double>(sum);
}

Lemma5Result lemma5_exact_and_check(double alpha, double beta, std::int64_t horizon) {
  require(alpha > 0.0 && alpha < 1.0, "lemma 5 needs alpha in (0,1)");
  require(beta > -1.0, "lemma 5 needs beta > -1");
  Lemma5Result result;
  result.s_t = s_t_sum(alpha, beta, horizon);
  const double lo = std::min(alpha, beta);
  const double hi = std::max(alpha, beta);
  result.bound = std::pow(2.0, 2.0 + lo) * xi_alpha(hi) /
                 std::pow(static_cast<double>(horizon), 1.0 + lo);
  result.margin = result.bound - result.s_t;
  return result;
}

Lemma2Result lemma2_check(const SpectrumProblem& problem, const FeatureDistribution& dist,
                          double R, double gamma, std::int64_t horizon) {
  require(horizon >= 1 && horizon <= 1000, "lemma 2 check needs 1 <= T <= 1000");
  require(problem.dim() <= 50, "lemma 2 check needs d <= 50");
  require(gamma > 0.0 && gamma <= 1.0 / (4.0 * problem.lambda_max()) * (1.0 + 1e-12),
          "lemma 2 needs 0 < gamma <= 1/(4 lambda_max)");
  require(R > 0.0, "lemma 2 needs R > 0");

  DiagonalPropagator prop(problem, dist, gamma, true);
  double trace_m0 = 0.0;
  for (double th : problem.theta_star) trace_m0 += th * th;

  std::vector<double> f{prop.risk()};
  f.reserve(static_cast<std::size_t>(horizon) + 1);
  Lemma2Result result;
  result.min_margin = std::numeric_limits<double>::infinity();
  result.min_rel_margin = std::numeric_limits<double>::infinity();
  for (std::int64_t t = 1; t <= horizon; ++t) {
    prop.step();
    const double ft = prop.risk();
    long double memory = 0.0L;
    for (std::int64_t k = 0; k < t; ++k) {
      memory += static_cast<long double>(f[static_cast<std::size_t>(k)]) /
                static_cast<long double>(t - k);
    }
    const double rhs = trace_m0 / (4.0 * gamma * static_cast<double>(t)) +
                       gamma * R * static_cast<double>(memory);
    const double margin = rhs - ft;
    result.min_margin = std::min(result.min_margin, margin);
    if (rhs > 0.0) result.min_rel_margin = std::min(result.min_rel_margin, margin / rhs);
    if (margin < 0.0 && !result.violating_t) result.violating_t = t;
    f.push_back(ft);
  }
  return result;
}

}  // namespace sgdlab
