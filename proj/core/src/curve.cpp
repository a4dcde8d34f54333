#include "sgdlab/curve.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "sgdlab/errors.hpp"

namespace sgdlab {
namespace {

constexpr std::array<std::pair<Series, std::string_view>, 8> kSeriesNames = {{
    {Series::kLast, "last"},
    {Series::kAveraged, "averaged"},
    {Series::kRunningMin, "running_min"},
    {Series::kExact, "exact"},
    {Series::kBoundThm1, "bound_thm1"},
    {Series::kBoundThm2, "bound_thm2"},
    {Series::kBoundThm3, "bound_thm3"},
    {Series::kReference, "reference"},
}};

}  // namespace

std::string_view series_name(Series series) {
  for (const auto& [value, name] : kSeriesNames) {
    if (value == series) return name;
  }
  return "unknown";
}

std::optional<Series> parse_series(std::string_view name) {
  for (const auto& [value, label] : kSeriesNames) {
    if (label == name) return value;
  }
  return std::nullopt;
}

bool is_deterministic(Series series) {
  return series != Series::kLast && series != Series::kAveraged &&
         series != Series::kRunningMin;
}

void RiskCurve::validate() const {
  if (values.size() != checkpoints.size()) {
    throw DimensionMismatch("curve has different numbers of checkpoints and values");
  }
  if (!stderrs.empty() && stderrs.size() != checkpoints.size()) {
    throw DimensionMismatch("curve stderr length differs from checkpoint count");
  }
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    if (k > 0 && checkpoints[k] <= checkpoints[k - 1]) {
      throw InvalidArgument("curve checkpoints must strictly increase");
    }
    if (!(values[k] >= 0.0)) throw InvalidArgument("curve values must be nonnegative");
  }
}

std::vector<std::int64_t> log_checkpoints(std::int64_t horizon, std::size_t count) {
  if (horizon < 1) throw InvalidArgument("horizon must be at least 1");
  if (count < 2) throw InvalidArgument("at least two checkpoints are required");
  std::vector<std::int64_t> points;
  points.reserve(count);
  const double log_h = std::log(static_cast<double>(horizon));
  for (std::size_t k = 0; k < count; ++k) {
    const double frac = static_cast<double>(k) / static_cast<double>(count - 1);
    auto t = static_cast<std::int64_t>(std::llround(std::exp(log_h * frac)));
    points.push_back(std::clamp<std::int64_t>(t, 1, horizon));
  }
  points.front() = 1;
  points.back() = horizon;
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

void validate_checkpoints(std::span<const std::int64_t> checkpoints, std::int64_t horizon) {
  if (checkpoints.empty()) throw InvalidArgument("at least one checkpoint is required");
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    if (checkpoints[k] < 1 || checkpoints[k] > horizon) {
      throw InvalidArgument("checkpoints must lie in [1, horizon]");
    }
    if (k > 0 && checkpoints[k] <= checkpoints[k - 1]) {
      throw InvalidArgument("checkpoints must strictly increase");
    }
  }
}

}  // namespace sgdlab
