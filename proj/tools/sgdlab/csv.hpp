#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "sgdlab/curve.hpp"

namespace sgdlab::cli {

struct LabeledCurve {
  std::string run_id;
  const RiskCurve* curve = nullptr;
};

/// %.17g with a fixed spelling for non-finite values.
std::string format_double(double value);

/// Tidy rows `run_id,series,t,value,stderr,replicates`; stderr is empty for
/// deterministic series.
std::string render_csv(std::span<const LabeledCurve> curves);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace sgdlab::cli
