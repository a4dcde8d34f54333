#include <benchmark/benchmark.h>

#include "sgdlab/bounds.hpp"
#include "sgdlab/propagator.hpp"
#include "sgdlab/runner.hpp"

using namespace sgdlab;

static void BM_DiagonalPropagation(benchmark::State& state) {
  const auto p = build_power_law(static_cast<std::size_t>(state.range(0)), 0.5, 0.0,
                                 OptimumMode::kTight);
  const auto dist = FeatureDistribution::gaussian(p);
  const double gamma = 1.0 / (2.0 * p.trace());
  for (auto _ : state) {
    DiagonalPropagator prop(p, dist, gamma, true);
    for (int t = 0; t < 1000; ++t) prop.step();
    benchmark::DoNotOptimize(prop.risk());
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_DiagonalPropagation)->Arg(30)->Arg(300)->Arg(2000);

static void BM_SgdPaths(benchmark::State& state) {
  const auto p = build_power_law(static_cast<std::size_t>(state.range(0)), 0.5, 0.0,
                                 OptimumMode::kTight);
  const auto kind = state.range(1) == 0 ? DistributionKind::kGaussian : DistributionKind::kCanonical;
  const auto dist = make_distribution(p, kind);
  PathConfig cfg;
  cfg.gamma = 1.0 / (2.0 * p.trace());
  cfg.horizon = 1000;
  cfg.replicates = 4;
  cfg.checkpoints = log_checkpoints(cfg.horizon, 16);
  for (auto _ : state) benchmark::DoNotOptimize(run_paths(p, dist, cfg));
  state.SetItemsProcessed(state.iterations() * cfg.horizon * cfg.replicates);
}
BENCHMARK(BM_SgdPaths)->Args({100, 0})->Args({100, 1})->Args({1000, 0})->Args({1000, 1});

static void BM_FullOracle(benchmark::State& state) {
  const auto p = build_power_law(static_cast<std::size_t>(state.range(0)), 0.5, 0.0,
                                 OptimumMode::kTight);
  const auto dist = FeatureDistribution::gaussian(p);
  for (auto _ : state) benchmark::DoNotOptimize(propagate_full_oracle(p, dist, 0.1, 100));
}
BENCHMARK(BM_FullOracle)->Arg(4)->Arg(8);

static void BM_XiAlpha(benchmark::State& state) {
  const double alpha = static_cast<double>(state.range(0)) / 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(xi_alpha(alpha));
}
BENCHMARK(BM_XiAlpha)->Arg(10)->Arg(50)->Arg(90);
BENCHMARK_MAIN();
