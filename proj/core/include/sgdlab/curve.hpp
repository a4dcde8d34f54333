#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace sgdlab {

enum class Series {
  kLast,
  kAveraged,
  kRunningMin,
  kExact,
  kBoundThm1,
  kBoundThm2,
  kBoundThm3,
  kReference,  // analytic guide curve such as 1/T^{1+alpha^beta}
};

std::string_view series_name(Series series);
std::optional<Series> parse_series(std::string_view name);
/// Exact, bound and reference curves are deterministic and carry no stderr.
bool is_deterministic(Series series);

/// Risk (or bound) values sampled at increasing step indices.
struct RiskCurve {
  Series series = Series::kExact;
  std::vector<std::int64_t> checkpoints;
  std::vector<double> values;
  std::vector<double> stderrs;  // empty for deterministic series
  int replicates = 0;           // 0 for deterministic series

  std::size_t size() const { return checkpoints.size(); }
  /// Throws InvalidArgument if lengths differ, checkpoints do not strictly
  /// increase, or any value is negative or NaN.
  void validate() const;
};

/// `count` log-spaced integers in [1, horizon], always containing 1 and
/// `horizon`, rounded and deduplicated. Requires count >= 2.
std::vector<std::int64_t> log_checkpoints(std::int64_t horizon, std::size_t count = 64);

/// Throws InvalidArgument unless checkpoints strictly increase within [1, horizon].
void validate_checkpoints(std::span<const std::int64_t> checkpoints, std::int64_t horizon);

}  // namespace sgdlab
