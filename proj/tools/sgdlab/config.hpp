#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sgdlab/curve.hpp"
#include "sgdlab/errors.hpp"
#include "sgdlab/spectrum.hpp"

namespace sgdlab::cli {

class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

enum class GammaMode { kExplicit, kThm1, kThm2, kThm3, kHalfInvTrace };

std::string_view gamma_mode_name(GammaMode mode);

struct ExperimentConfig {
  std::string run_id;  // empty: the command name is used

  std::size_t d = 1;
  double alpha = 0.0;
  double beta = 0.0;
  OptimumMode optimum_mode = OptimumMode::kTight;
  double eps = 0.01;

  DistributionKind kind = DistributionKind::kGaussian;
  std::optional<double> prob_exponent;

  GammaMode gamma_mode = GammaMode::kHalfInvTrace;
  std::optional<double> gamma_value;

  std::int64_t horizon = 1000;
  int replicates = 10;
  std::uint64_t base_seed = 0;
  std::size_t checkpoint_count = 64;
  std::vector<Series> series;  // empty: command default

  std::string csv_path;  // relative paths resolve against --out
  std::optional<std::string> svg_path;
};

/// Parses and validates a JSON config. Unknown keys are rejected at every
/// level. Throws ConfigError.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

SpectrumProblem build_problem(const ExperimentConfig& config);
FeatureDistribution build_distribution(const ExperimentConfig& config,
                                       const SpectrumProblem& problem);

struct ResolvedGamma {
  double gamma = 0.0;
  bool exceeds_cap = false;  // gamma > 1/(4 lambda_max)
};

/// thm1 uses the configured horizon. Throws ConfigError for explicit mode
/// without a value.
ResolvedGamma resolve_gamma(const ExperimentConfig& config, const SpectrumProblem& problem,
                            const FeatureDistribution& dist);

}  // namespace sgdlab::cli
