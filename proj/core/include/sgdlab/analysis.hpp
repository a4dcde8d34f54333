#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sgdlab/bounds.hpp"
#include "sgdlab/curve.hpp"
#include "sgdlab/spectrum.hpp"

namespace sgdlab {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;  // OLS standard error of the slope
  std::int64_t t_lo = 0;      // first and last checkpoint used
  std::int64_t t_hi = 0;
  int n_points = 0;
};

/// First step included by the default fit window.
inline constexpr std::int64_t kDefaultSlopeStart = 10;

/// OLS fit of ln(value) on ln(t) over checkpoints in [t_lo, t_hi]. Throws
/// InvalidArgument with fewer than 3 points in the window or any
/// nonpositive value inside it.
SlopeFit fit_loglog_slope(const RiskCurve& curve, std::int64_t t_lo, std::int64_t t_hi);
/// Window [10, last checkpoint].
SlopeFit fit_loglog_slope(const RiskCurve& curve);

struct BoundReport {
  std::optional<Theorem> theorem;  // taken from the bound curve's series
  double gamma = 0.0;
  bool certified = false;
  double min_margin = 0.0;  // min_t bound_t - risk_t
  double max_margin = 0.0;  // max_t bound_t - risk_t
  std::optional<std::int64_t> violating_t;  // first t with negative margin
};

/// Compares a risk curve against a bound on the same grid. `gamma` is
/// recorded as given.
BoundReport dominance_report(const RiskCurve& exact_curve, const RiskCurve& bound_curve,
                             bool certified, double gamma = 0.0);

struct WindowSlope {
  std::int64_t t_lo = 0;  // window [t_lo, 2 t_lo)
  std::int64_t t_hi = 0;
  double local_slope = 0.0;
  /// OLS slope over every checkpoint in [10, t_lo); absent with < 3 points.
  std::optional<double> reference_slope;
  int n_points = 0;
};

/// Log-log slopes over dyadic windows [2^k, 2^{k+1}) starting at the first
/// power of two >= 10. Windows need two checkpoints; scanning stops at the
/// first nonpositive value.
std::vector<WindowSlope> dyadic_slopes(const RiskCurve& curve);

/// True when the window's slope has dropped more than 1.0 below the
/// power-law slope fitted before it.
bool is_steepening(const WindowSlope& window);

struct TransitionResult {
  double tau_predicted = 0.0;  // 1 / (gamma lambda_min)
  std::optional<double> tau_detected;  // geometric centre of the triggering window
  std::optional<WindowSlope> window;
};

/// Detection runs only when the curve reaches 5 tau_predicted.
TransitionResult linear_regime_transition(const RiskCurve& curve, double gamma,
                                          double lambda_min);

struct TheoremCheck {
  BoundSpec spec;     // step size at the horizon
  RiskCurve exact;    // exact risk, on checkpoints t >= min_horizon
  RiskCurve bound;
  BoundReport report;
};

/// Evaluates a theorem's bound against the exact propagator. thm1's
/// step size depends on the horizon, so each checkpoint t gets its own run
/// at gamma = (4 R ln t)^{-1}; thm2 and thm3 share one run. A forced
/// step size is used for every checkpoint and leaves the report
/// uncertified.
TheoremCheck check_theorem(const SpectrumProblem& problem, const FeatureDistribution& dist,
                           const ProblemConstants& constants, Theorem theorem,
                           std::int64_t horizon, std::span<const std::int64_t> checkpoints,
                           std::optional<double> forced_gamma = std::nullopt);

}  // namespace sgdlab
