#include "sgdlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sgdlab/errors.hpp"
#include "sgdlab/propagator.hpp"

namespace sgdlab {
namespace {

struct Ols {
  double slope;
  double intercept;
  double stderr_slope;
};

Ols ols(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("slope fit needs distinct checkpoints");
  Ols fit{sxy / sxx, 0.0, 0.0};
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      sse += r * r;
    }
    fit.stderr_slope = std::sqrt(sse / (n - 2.0) / sxx);
  }
  return fit;
}

struct LogPoints {
  std::vector<double> x;
  std::vector<double> y;
};

}  // namespace

SlopeFit fit_loglog_slope(const RiskCurve& curve, std::int64_t t_lo, std::int64_t t_hi) {
  if (curve.values.size() != curve.checkpoints.size()) {
    throw InvalidArgument("curve values and checkpoints differ in length");
  }
  if (t_lo > t_hi) throw InvalidArgument("slope window is empty");
  LogPoints pts;
  SlopeFit fit;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const std::int64_t t = curve.checkpoints[i];
    if (t < t_lo || t > t_hi) continue;
    const double v = curve.values[i];
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("nonpositive value at t = " + std::to_string(t) +
                            " inside the slope window");
    }
    if (pts.x.empty()) fit.t_lo = t;
    fit.t_hi = t;
    pts.x.push_back(std::log(static_cast<double>(t)));
    pts.y.push_back(std::log(v));
  }
  if (pts.x.size() < 3) throw InvalidArgument("slope fit needs at least 3 checkpoints in window");
  const Ols o = ols(pts.x, pts.y);
  fit.slope = o.slope;
  fit.intercept = o.intercept;
  fit.stderr_slope = o.stderr_slope;
  fit.n_points = static_cast<int>(pts.x.size());
  return fit;
}

SlopeFit fit_loglog_slope(const RiskCurve& curve) {
  if (curve.checkpoints.empty()) throw InvalidArgument("empty curve");
  return fit_loglog_slope(curve, kDefaultSlopeStart, curve.checkpoints.back());
}

BoundReport dominance_report(const RiskCurve& exact_curve, const RiskCurve& bound_curve,
                             bool certified, double gamma) {
  if (exact_curve.checkpoints != bound_curve.checkpoints) {
    throw InvalidArgument("risk and bound curves use different checkpoint grids");
  }
  if (exact_curve.values.size() != exact_curve.size() ||
      bound_curve.values.size() != bound_curve.size()) {
    throw InvalidArgument("curve values and checkpoints differ in length");
  }
  if (exact_curve.checkpoints.empty()) throw InvalidArgument("empty curves");
  BoundReport report;
  report.theorem = theorem_of(bound_curve.series);
  report.gamma = gamma;
  report.certified = certified;
  report.min_margin = std::numeric_limits<double>::infinity();
  report.max_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < exact_curve.size(); ++i) {
    const double margin = bound_curve.values[i] - exact_curve.values[i];
    report.min_margin = std::min(report.min_margin, margin);
    report.max_margin = std::max(report.max_margin, margin);
    if (margin < 0.0 && !report.violating_t) report.violating_t = exact_curve.checkpoints[i];
  }
  return report;
}

std::vector<WindowSlope> dyadic_slopes(const RiskCurve& curve) {
  std::vector<WindowSlope> windows;
  if (curve.checkpoints.empty()) return windows;
  // Points usable for fitting: the positive prefix from t = 10 on.
  LogPoints pts;
  std::vector<std::int64_t> ts;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve.checkpoints[i] < kDefaultSlopeStart) continue;
    const double v = curve.values[i];
    if (!(v > 0.0) || !std::isfinite(v)) break;
    ts.push_back(curve.checkpoints[i]);
    pts.x.push_back(std::log(static_cast<double>(curve.checkpoints[i])));
    pts.y.push_back(std::log(v));
  }
  if (ts.empty()) return windows;

  std::int64_t lo = 16;
  std::size_t begin = 0;
  while (lo <= ts.back()) {
    const std::int64_t hi = 2 * lo;
    while (begin < ts.size() && ts[begin] < lo) ++begin;
    std::size_t end = begin;
    while (end < ts.size() && ts[end] < hi) ++end;
    if (end - begin >= 2) {
      WindowSlope w;
      w.t_lo = lo;
      w.t_hi = hi;
      w.n_points = static_cast<int>(end - begin);
      w.local_slope = ols(std::span(pts.x).subspan(begin, end - begin),
                          std::span(pts.y).subspan(begin, end - begin))
                          .slope;
      if (begin >= 3) {
        w.reference_slope =
            ols(std::span(pts.x).first(begin), std::span(pts.y).first(begin)).slope;
      }
      windows.push_back(w);
    }
    lo = hi;
  }
  return windows;
}

bool is_steepening(const WindowSlope& window) {
  return window.reference_slope && window.local_slope < *window.reference_slope - 1.0;
}

TransitionResult linear_regime_transition(const RiskCurve& curve, double gamma,
                                          double lambda_min) {
  if (!(gamma > 0.0) || !(lambda_min > 0.0)) {
    throw InvalidArgument("transition scale needs gamma > 0 and lambda_min > 0");
  }
  TransitionResult result;
  result.tau_predicted = 1.0 / (gamma * lambda_min);
  if (curve.checkpoints.empty() ||
      static_cast<double>(curve.checkpoints.back()) < 5.0 * result.tau_predicted) {
    return result;
  }
  for (const WindowSlope& w : dyadic_slopes(curve)) {
    if (is_steepening(w)) {
      result.window = w;
      result.tau_detected = std::sqrt(static_cast<double>(w.t_lo) * static_cast<double>(w.t_hi));
      break;
    }
  }
  return result;
}

TheoremCheck check_theorem(const SpectrumProblem& problem, const FeatureDistribution& dist,
                           const ProblemConstants& constants, Theorem theorem,
                           std::int64_t horizon, std::span<const std::int64_t> checkpoints,
                           std::optional<double> forced_gamma) {
  validate_checkpoints(checkpoints, horizon);
  TheoremCheck check;
  check.spec = make_bound_spec(theorem, constants, horizon, forced_gamma);

  std::vector<std::int64_t> grid;
  for (std::int64_t t : checkpoints) {
    if (t >= min_horizon(theorem)) grid.push_back(t);
  }
  if (grid.empty()) throw InvalidArgument("no checkpoint reaches the theorem's minimal horizon");

  check.exact.series = Series::kExact;
  check.bound.series = bound_series(theorem);
  check.exact.checkpoints = grid;
  check.bound.checkpoints = grid;
  const PropagateOptions options{.allow_large_gamma = true};

  if (theorem == Theorem::kThm1 && !forced_gamma) {
    for (std::int64_t t : grid) {
      const double gamma_t = step_size_for(theorem, constants, constants.alpha, t);
      const std::int64_t single[] = {t};
      const RiskCurve run = propagate_diagonal(problem, dist, gamma_t, t, single, options);
      check.exact.values.push_back(run.values.front());
      check.bound.values.push_back(bound_value(theorem, constants, gamma_t, t));
    }
  } else {
    const RiskCurve run =
        propagate_diagonal(problem, dist, check.spec.gamma, grid.back(), grid, options);
    check.exact.values = run.values;
    for (std::int64_t t : grid) {
      check.bound.values.push_back(bound_value(theorem, constants, check.spec.gamma, t));
    }
  }
  check.report = dominance_report(check.exact, check.bound, check.spec.certified,
                                  check.spec.gamma);
  return check;
}

}  // namespace sgdlab
