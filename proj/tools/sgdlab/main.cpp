#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "verify.hpp"

namespace {

constexpr int kExitInvalidConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitVerifyFailed = 3;

unsigned threads_from_env() {
  const char* env = std::getenv("SGDLAB_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  try {
    const long n = std::stol(env);
    if (n >= 1) return static_cast<unsigned>(n);
  } catch (const std::exception&) {
  }
  throw sgdlab::cli::ConfigError("SGDLAB_THREADS must be a positive integer");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace sgdlab::cli;

  CLI::App app{"Last-iterate SGD experiments for noiseless least squares"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 0;
  bool force_gamma = false;
  bool rotate = false;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config_path, "experiment config (JSON)");
    if (needs_config) opt->required();
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "base seed override");
    sub->add_option("--threads", threads, "worker threads (overrides SGDLAB_THREADS)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--force-gamma", force_gamma,
                  "accept a step size outside the theorem or stability conditions");
  };

  CLI::App* propagate = app.add_subcommand("propagate", "exact expected risk");
  add_common(propagate, true);
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo SGD paths");
  add_common(simulate, true);
  simulate->add_flag("--rotate", rotate, "run in a random orthonormal basis");
  CLI::App* bounds = app.add_subcommand("bounds", "theorem bounds versus exact risk");
  add_common(bounds, true);

  CLI::App* fig1 = app.add_subcommand("fig1", "reproduce the two synthetic panels");
  add_common(fig1, false);
  std::string panel = "left";
  std::int64_t horizon = 1'000'000;
  std::string optimum = "tight";
  int replicates = 10;
  fig1->add_option("--panel", panel, "left or right")
      ->check(CLI::IsMember({"left", "right"}))
      ->capture_default_str();
  fig1->add_option("--horizon", horizon, "number of SGD steps")
      ->check(CLI::Range(std::int64_t{2}, std::int64_t{100'000'000}))
      ->capture_default_str();
  fig1->add_option("--optimum", optimum, "optimum mode, tight or fig1")
      ->check(CLI::IsMember({"tight", "fig1"}))
      ->capture_default_str();
  fig1->add_option("--replicates", replicates, "Monte Carlo repetitions")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  fig1->add_flag("--rotate", rotate, "run in a random orthonormal basis");

  CLI::App* lemmas = app.add_subcommand("lemmas", "appendix lemma grids");
  add_common(lemmas, false);

  CLI::App* verify = app.add_subcommand("verify", "run the acceptance criteria");
  add_common(verify, false);
  std::string level = "quick";
  verify->add_option("--level", level, "quick or full")
      ->check(CLI::IsMember({"quick", "full"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalidConfig;
  }

  try {
    CommandOptions options;
    options.out_dir = out_dir;
    options.threads = threads > 0 ? static_cast<unsigned>(threads) : threads_from_env();
    options.force_gamma = force_gamma;
    options.rotate = rotate;
    auto* subcommand = app.get_subcommands().front();
    if (subcommand->count("--seed") > 0) options.seed = seed;
    std::filesystem::create_directories(options.out_dir);

    if (subcommand == propagate || subcommand == simulate || subcommand == bounds) {
      const ExperimentConfig config = load_config(config_path);
      if (subcommand == propagate) cmd_propagate(config, options, std::cout);
      if (subcommand == simulate) cmd_simulate(config, options, std::cout);
      if (subcommand == bounds) cmd_bounds(config, options, std::cout);
      return 0;
    }
    if (subcommand == fig1) {
      Fig1Options fig;
      fig.panel = panel == "left" ? Panel::kLeft : Panel::kRight;
      fig.horizon = horizon;
      fig.optimum_mode = optimum == "fig1" ? sgdlab::OptimumMode::kFig1 : sgdlab::OptimumMode::kTight;
      fig.replicates = replicates;
      cmd_fig1(fig, options, std::cout);
      return 0;
    }
    if (subcommand == lemmas) {
      return cmd_lemmas(options, std::cout) ? 0 : kExitVerifyFailed;
    }
    if (subcommand == verify) {
      const auto results = run_acceptance(level == "full" ? VerifyLevel::kFull : VerifyLevel::kQuick,
                                          options.threads, &std::cout);
      bool ok = true;
      for (const auto& r : results) ok = ok && r.passed;
      std::cout << (ok ? "verify: all criteria passed" : "verify: FAILED") << std::endl;
      return ok ? 0 : kExitVerifyFailed;
    }
  } catch (const sgdlab::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const sgdlab::InvalidArgument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidConfig;
  }
  return 0;
}
