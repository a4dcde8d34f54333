#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "config.hpp"

namespace sgdlab::cli {

struct CommandOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides base_seed
  unsigned threads = 1;
  bool force_gamma = false;
  bool rotate = false;
};

/// Exact expected risk via the diagonal recursion.
void cmd_propagate(const ExperimentConfig& config, const CommandOptions& options,
                   std::ostream& log);
/// Monte Carlo SGD paths; `exact` may be requested as an overlay.
void cmd_simulate(const ExperimentConfig& config, const CommandOptions& options,
                  std::ostream& log);
/// Theorem bounds against the exact propagator, one block per theorem.
void cmd_bounds(const ExperimentConfig& config, const CommandOptions& options,
                std::ostream& log);

enum class Panel { kLeft, kRight };

struct Fig1Options {
  Panel panel = Panel::kLeft;
  std::int64_t horizon = 1'000'000;
  OptimumMode optimum_mode = OptimumMode::kTight;
  int replicates = 10;
  std::size_t checkpoint_count = 96;
};

void cmd_fig1(const Fig1Options& fig, const CommandOptions& options, std::ostream& log);

/// Runs the lemma grids, writes lemmas.csv. Returns false if any margin is
/// negative.
bool cmd_lemmas(const CommandOptions& options, std::ostream& log);

}  // namespace sgdlab::cli
