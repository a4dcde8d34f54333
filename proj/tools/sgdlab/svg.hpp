#pragma once

#include <optional>
#include <span>
#include <string>

#include "sgdlab/curve.hpp"

namespace sgdlab::cli {

struct SvgOptions {
  std::string title;
  std::optional<double> marker_t;  // vertical dashed line, e.g. tau
  std::string marker_label = "tau";
};

/// Log-log line chart with one polyline per curve. Nonpositive values are
/// skipped.
std::string render_svg(std::span<const RiskCurve* const> curves, const SvgOptions& options);

}  // namespace sgdlab::cli
