#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sgdlab/curve.hpp"
#include "sgdlab/spectrum.hpp"

namespace sgdlab {

/// Half of (theta - theta*)^T H (theta - theta*), evaluated in the eigenbasis.
double risk(const SpectrumProblem& problem, std::span<const double> theta);

/// SGD iterate plus the statistics tracked along a single path.
struct SgdState {
  std::vector<double> theta;      // theta_t
  std::vector<double> theta_avg;  // (1/t) sum_{k=1..t} theta_k; zero at t = 0
  std::int64_t t = 0;
  double min_risk_so_far = 0.0;   // min_{k<=t} R(theta_k), includes theta_0
};

/// theta_0 = 0, theta_avg = 0, min_risk_so_far = R(0).
SgdState initial_state(const SpectrumProblem& problem);

/// theta <- theta - gamma (<theta, x> - y) x, then advances t, the running
/// average, and the running minimum. Throws DivergenceError if any
/// coordinate becomes non-finite.
void sgd_step(SgdState& state, const SpectrumProblem& problem, std::span<const double> x,
              double y, double gamma);

/// SplitMix64 finalizer applied to base_seed + (replicate + 1) * 0x9E3779B97F4A7C15.
std::uint64_t replicate_seed(std::uint64_t base_seed, std::uint64_t replicate);

/// Draws features in the eigenbasis. For the canonical law a draw touches a
/// single coordinate, reported through `sample_atom`.
class FeatureSampler {
 public:
  explicit FeatureSampler(const FeatureDistribution& dist);

  /// Dense draw written into x (length d).
  void sample(std::mt19937_64& rng, std::span<double> x);
  /// Canonical law only: index of the drawn atom.
  std::size_t sample_atom(std::mt19937_64& rng);

  const FeatureDistribution& distribution() const { return *dist_; }

 private:
  const FeatureDistribution* dist_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::discrete_distribution<std::size_t> atoms_;
};

struct PathConfig {
  double gamma = 0.0;
  std::int64_t horizon = 1;
  int replicates = 1;
  std::uint64_t base_seed = 0;
  std::vector<std::int64_t> checkpoints;  // defaults to log_checkpoints(horizon)
  std::vector<Series> track = {Series::kLast};
  /// Orthogonal d x d matrix; when set, samples and theta* are rotated
  /// before stepping and risk is evaluated after rotating back.
  std::optional<Eigen::MatrixXd> rotation;
  unsigned threads = 1;
};

/// Monte Carlo estimate of the expected risk of each tracked series. Replicate
/// r draws from std::mt19937_64(replicate_seed(base_seed, r)); the reduction
/// runs in replicate order so results do not depend on the thread count.
/// Throws DivergenceError naming the lowest diverging replicate.
std::vector<RiskCurve> run_paths(const SpectrumProblem& problem,
                                 const FeatureDistribution& dist, const PathConfig& config);

/// Haar-like random orthogonal matrix from the QR factorisation of a
/// Gaussian matrix.
Eigen::MatrixXd random_rotation(std::size_t d, std::uint64_t seed);

}  // namespace sgdlab
