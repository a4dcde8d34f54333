#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "sgdlab/bounds.hpp"
#include "sgdlab/errors.hpp"
#include "sgdlab/propagator.hpp"

using namespace sgdlab;

namespace {

ProblemConstants unit_constants() {
  ProblemConstants c;
  c.trace_H = 1.0;
  c.lambda_max = 1.0;
  c.lambda_min = 1.0;
  c.norm_theta_sq = 1.0;
  c.R = 1.0;
  c.lambda_o = std::exp(1.0);
  c.R_ln = 1.0;
  c.R_alpha = 1.0;
  c.C_ln = 1.0;
  c.C_beta = 1.0;
  c.alpha = 0.5;
  c.beta = 0.0;
  return c;
}

double brute_s_t(double a, double b, std::int64_t T) {
  long double acc = 0.0L;
  for (std::int64_t t = 1; t < T; ++t) {
    acc += 1.0L / (std::pow(static_cast<long double>(t), 1.0L + b) *
                   std::pow(static_cast<long double>(T - t), 1.0L + a));
  }
  return static_cast<double>(acc);
}

}  // namespace

TEST(Theorem, NamesRoundTrip) {
  for (Theorem t : {Theorem::kThm1, Theorem::kThm2, Theorem::kThm3}) {
    EXPECT_EQ(parse_theorem(theorem_name(t)), t);
    EXPECT_EQ(theorem_of(bound_series(t)), t);
  }
  EXPECT_FALSE(parse_theorem("thm4").has_value());
  EXPECT_FALSE(theorem_of(Series::kExact).has_value());
  EXPECT_EQ(min_horizon(Theorem::kThm1), 2);
  EXPECT_EQ(min_horizon(Theorem::kThm2), 3);
  EXPECT_EQ(min_horizon(Theorem::kThm3), 3);
}

TEST(XiAlpha, ClosedForms) {
  EXPECT_NEAR(xi_alpha(1.0), std::numbers::pi * std::numbers::pi / 6.0, 1e-10 * 1.6449);
  EXPECT_NEAR(xi_alpha(3.0), std::pow(std::numbers::pi, 4) / 90.0, 1e-10 * 1.0823);
}

TEST(XiAlpha, AgreesWithBruteForceBracket) {
  const oracle::Interval bracket = oracle::zeta_bracket(0.5, 100'000'000);
  const double xi = xi_alpha(0.5);
  EXPECT_GE(xi, static_cast<double>(bracket.lo) * (1 - 1e-12));
  EXPECT_LE(xi, static_cast<double>(bracket.hi) * (1 + 1e-12));
  EXPECT_NEAR(xi, 2.6123753486854883, 1e-10 * xi);
}

TEST(XiAlpha, SmallAlphaBracket) {
  // A short brute-force sum with the rigorous integral tail bracket.
  for (double a : {0.1, 0.25, 0.9}) {
    const oracle::Interval bracket = oracle::zeta_bracket(a, 1'000'000);
    const double xi = xi_alpha(a);
    EXPECT_GE(xi, static_cast<double>(bracket.lo));
    EXPECT_LE(xi, static_cast<double>(bracket.hi));
  }
}

TEST(XiAlpha, DecreasingInAlpha) {
  double prev = xi_alpha(0.05);
  for (double a = 0.1; a <= 4.0; a += 0.05) {
    const double cur = xi_alpha(a);
    EXPECT_LT(cur, prev) << "alpha = " << a;
    EXPECT_GT(cur, 1.0);
    prev = cur;
  }
}

TEST(XiAlpha, RejectsNonPositive) {
  EXPECT_THROW(xi_alpha(0.0), InvalidArgument);
  EXPECT_THROW(xi_alpha(-1.0), InvalidArgument);
  EXPECT_THROW(xi_alpha(NAN), InvalidArgument);
}

TEST(StepSize, Examples) {
  ProblemConstants c = unit_constants();
  EXPECT_NEAR(step_size_for(Theorem::kThm1, c, 0.5, 10), 1.0 / (4.0 * std::log(10.0)), 1e-16);
  EXPECT_NEAR(step_size_for(Theorem::kThm1, c, 0.5, 10), 0.1085736, 1e-7);
  EXPECT_NEAR(step_size_for(Theorem::kThm2, c, 0.5, 10), 1.0 / 14.0, 1e-16);
  c.lambda_max = 1e-6;
  const double xi = static_cast<double>(oracle::zeta_bracket(0.5, 10'000'000).lo +
                                        oracle::zeta_bracket(0.5, 10'000'000).hi) / 2.0;
  EXPECT_NEAR(step_size_for(Theorem::kThm3, c, 0.5, 10), std::pow(32.0 * xi, -2.0), 1e-9 * std::pow(32.0 * xi, -2.0));
}

TEST(StepSize, Thm3CappedByLambdaMax) {
  ProblemConstants c = unit_constants();
  c.R_alpha = 1e-4;
  c.lambda_max = 2.0;
  EXPECT_DOUBLE_EQ(step_size_for(Theorem::kThm3, c, 0.5, 10), 0.125);
}

TEST(StepSize, HorizonPreconditions) {
  const ProblemConstants c = unit_constants();
  EXPECT_THROW(step_size_for(Theorem::kThm1, c, 0.5, 1), InvalidArgument);
  EXPECT_NO_THROW(step_size_for(Theorem::kThm1, c, 0.5, 2));
  EXPECT_THROW(step_size_for(Theorem::kThm2, c, 0.5, 2), InvalidArgument);
  EXPECT_THROW(step_size_for(Theorem::kThm3, c, 0.5, 2), InvalidArgument);
}

TEST(StepSize, Admissibility) {
  const ProblemConstants c = unit_constants();
  const double g1 = step_size_for(Theorem::kThm1, c, 0.5, 100);
  EXPECT_TRUE(step_size_admissible(Theorem::kThm1, c, g1, 100));
  EXPECT_FALSE(step_size_admissible(Theorem::kThm1, c, 0.5 * g1, 100));
  const double g3 = step_size_for(Theorem::kThm3, c, 0.5, 100);
  EXPECT_TRUE(step_size_admissible(Theorem::kThm3, c, g3, 100));
  EXPECT_TRUE(step_size_admissible(Theorem::kThm3, c, 0.5 * g3, 100));
  EXPECT_FALSE(step_size_admissible(Theorem::kThm3, c, 2.0 * g3, 100));
}

TEST(BoundValue, Examples) {
  ProblemConstants c = unit_constants();
  EXPECT_NEAR(bound_value(Theorem::kThm1, c, 0.1, 10), 3.0 * std::log(10.0) / 10.0, 1e-15);
  EXPECT_NEAR(bound_value(Theorem::kThm1, c, 0.1, 10), 0.690775, 1e-6);
  EXPECT_NEAR(bound_value(Theorem::kThm2, c, 1.0 / 14.0, 100), 0.1, 1e-16);
  c.C_beta = 2.5;
  const double gamma = 0.01;
  EXPECT_NEAR(bound_value(Theorem::kThm3, c, gamma, 1000), 2.0 * 2.5 / (gamma * 1000.0), 1e-12);
}

TEST(BoundValue, Thm3GeneralExponents) {
  ProblemConstants c = unit_constants();
  c.alpha = 0.3;
  c.beta = 0.8;
  c.C_beta = 1.7;
  const double gamma = 0.02;
  const double expected = 2.0 * 1.7 * std::pow(1.8 / gamma, 1.8) / std::pow(500.0, 1.3);
  EXPECT_NEAR(bound_value(Theorem::kThm3, c, gamma, 500), expected, 1e-12 * expected);
  // Large exponents stay finite through log-space evaluation.
  c.beta = 40.0;
  EXPECT_TRUE(std::isfinite(bound_value(Theorem::kThm3, c, 0.5, 1'000'000)));
}

TEST(BoundSpec, PrescribedAndForced) {
  const ProblemConstants c = unit_constants();
  const auto spec = make_bound_spec(Theorem::kThm3, c, 100);
  EXPECT_TRUE(spec.certified);
  EXPECT_DOUBLE_EQ(spec.gamma, step_size_for(Theorem::kThm3, c, 0.5, 100));
  EXPECT_NEAR(spec.xi_alpha, xi_alpha(0.5), 0.0);
  const auto forced = make_bound_spec(Theorem::kThm3, c, 100, spec.gamma * 0.5);
  EXPECT_FALSE(forced.certified);
  EXPECT_DOUBLE_EQ(forced.gamma, spec.gamma * 0.5);
  const auto thm1 = make_bound_spec(Theorem::kThm1, c, 100);
  EXPECT_EQ(thm1.xi_alpha, 0.0);
  EXPECT_TRUE(thm1.certified);
}

TEST(Lemma3, Examples) {
  EXPECT_DOUBLE_EQ(s_n_exact(0.25, 2), 1.25);
  EXPECT_NEAR(lemma3_check(0.25, 2), 7.0 * std::log(4.0) / 2.0 - 0.3125, 1e-14);
  EXPECT_NEAR(lemma3_check(0.25, 2), 4.53953, 1e-5);
  for (double x : {0.01, 0.1, 0.25}) {
    EXPECT_DOUBLE_EQ(s_n_exact(x, 1), 1.0);
    EXPECT_NEAR(lemma3_check(x, 1), 7.0 * std::log(1.0 / x) - x, 1e-14);
  }
  EXPECT_GT(lemma3_check(1e-12, 50), lemma3_check(1e-3, 50));
}

TEST(Lemma3, MatchesLiteralSum) {
  for (double x : {0.3, 0.05}) {
    for (std::int64_t n : {3, 17, 200}) {
      long double acc = 0.0L;
      for (std::int64_t k = 0; k < n; ++k) acc += std::pow(1.0L - x, k) / static_cast<long double>(n - k);
      EXPECT_NEAR(s_n_exact(x, n), static_cast<double>(acc), 1e-13 * static_cast<double>(acc));
    }
  }
}

TEST(Lemma3, NonnegativeOnGrid) {
  for (int k = 2; k <= 40; ++k) {
    const double x = std::ldexp(1.0, -k);
    for (std::int64_t n : {1, 2, 5, 10, 100, 1000, 10'000, 100'000}) {
      EXPECT_GE(lemma3_check(x, n), 0.0) << "x = 2^-" << k << ", n = " << n;
    }
  }
}

TEST(Lemma4, Example) { EXPECT_DOUBLE_EQ(lemma4_check(0.5, 2.0, 1.0), 0.375); }

TEST(Lemma4, NonnegativeOnRandomSamples) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 10'000; ++k) {
    const double x = std::max(unit(rng), 1e-12);
    const double t = std::exp(unit(rng) * std::log(1e6));
    const double r = 5.0 * std::max(unit(rng), 1e-9);
    EXPECT_GE(lemma4_check(x, t, r), 0.0) << x << " " << t << " " << r;
  }
}

TEST(Lemma5, Example) {
  const auto res = lemma5_exact_and_check(0.5, 0.0, 2);
  EXPECT_DOUBLE_EQ(res.s_t, 1.0);
  EXPECT_NEAR(res.bound, 2.0 * xi_alpha(0.5), 1e-14);
  EXPECT_NEAR(res.margin, 2.0 * 2.6123753486854883 - 1.0, 1e-9);
}

TEST(Lemma5, LiteralSumAndSymmetry) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> expo(-0.9, 2.0);
  for (int k = 0; k < 30; ++k) {
    const double a = expo(rng);
    const double b = expo(rng);
    const std::int64_t T = 2 + static_cast<std::int64_t>(rng() % 3000);
    const double s = s_t_sum(a, b, T);
    EXPECT_NEAR(s, brute_s_t(a, b, T), 1e-12 * s);
    EXPECT_NEAR(s, s_t_sum(b, a, T), 1e-12 * s);
  }
}

TEST(Lemma5, MarginNonnegativeOnGrid) {
  for (int ai = 1; ai <= 9; ++ai) {
    const double a = ai / 10.0;
    for (double b : {-0.5, 0.0, 0.5, 1.0, 2.0}) {
      for (std::int64_t T : {2, 10, 100, 1000}) {
        const auto res = lemma5_exact_and_check(a, b, T);
        EXPECT_GE(res.margin, 0.0) << a << " " << b << " " << T;
        EXPECT_NEAR(res.margin, res.bound - res.s_t, 1e-15 * res.bound);
      }
    }
  }
}

TEST(Lemma5, RejectsOutOfRange) {
  EXPECT_THROW(s_t_sum(0.5, 0.5, 1), InvalidArgument);
  EXPECT_THROW(s_t_sum(0.5, 0.5, 1'000'001), InvalidArgument);
  EXPECT_THROW(s_t_sum(-1.0, 0.5, 10), InvalidArgument);
  EXPECT_THROW(lemma5_exact_and_check(1.0, 0.0, 10), InvalidArgument);
  EXPECT_THROW(lemma5_exact_and_check(0.5, -1.0, 10), InvalidArgument);
}

TEST(Lemma2, HoldsAlongExactRecursion) {
  for (DistributionKind kind : {DistributionKind::kGaussian, DistributionKind::kCanonical}) {
    const auto p = build_power_law(40, 0.5, 0.5, OptimumMode::kTight);
    const auto dist = make_distribution(p, kind);
    const auto c = compute_constants(p, dist, 0.5, 0.5);
    for (double gamma : {0.25 / p.lambda_max(), 0.01, 1e-3}) {
      const auto res = lemma2_check(p, dist, c.R, gamma, 1000);
      EXPECT_GE(res.min_margin, 0.0);
      EXPECT_FALSE(res.violating_t.has_value());
    }
  }
}

TEST(Lemma2, MarginMatchesDirectEvaluation) {
  const auto p = build_power_law(10, 0.5, 0.0, OptimumMode::kTight);
  const auto dist = FeatureDistribution::gaussian(p);
  const double gamma = 0.1;
  const std::int64_t T = 200;
  std::vector<std::int64_t> cps;
  for (std::int64_t t = 1; t <= T; ++t) cps.push_back(t);
  const auto exact = propagate_diagonal(p, dist, gamma, T, cps);
  double trace_m0 = 0.0;
  for (double v : p.theta_star) trace_m0 += v * v;
  std::vector<double> f = {p.initial_risk()};
  for (double v : exact.values) f.push_back(v);
  EXPECT_THROW(lemma2_check(p, dist, 0.0, gamma, T), InvalidArgument);
  for (double R : {0.05, 0.5, 3.0}) {
    double min_margin = INFINITY;
    for (std::int64_t t = 1; t <= T; ++t) {
      double conv = 0.0;
      for (std::int64_t k = 0; k < t; ++k) conv += f[k] / static_cast<double>(t - k);
      const double rhs = trace_m0 / (4.0 * gamma * t) + gamma * R * conv;
      min_margin = std::min(min_margin, rhs - f[t]);
    }
    const auto res = lemma2_check(p, dist, R, gamma, T);
    EXPECT_NEAR(res.min_margin, min_margin, 1e-12);
    EXPECT_EQ(res.violating_t.has_value(), min_margin < 0.0);
  }
}

TEST(Lemma2, RejectsLargeStep) {
  const auto p = build_power_law(4, 0.5, 0.0, OptimumMode::kTight);
  EXPECT_THROW(lemma2_check(p, FeatureDistribution::gaussian(p), 1.0, 0.3, 10), InvalidArgument);
  EXPECT_THROW(lemma2_check(p, FeatureDistribution::gaussian(p), 1.0, 0.1, 1001), InvalidArgument);
}
