#include "sgdlab/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include <Eigen/QR>

#include "sgdlab/errors.hpp"

namespace sgdlab {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

bool has_series(std::span<const Series> track, Series s) {
  return std::find(track.begin(), track.end(), s) != track.end();
}

// One replicate's per-checkpoint values, laid out series-major.
struct ReplicateTrace {
  std::vector<double> values;
  std::optional<std::int64_t> diverged_at;
};

class PathSimulator {
 public:
  PathSimulator(const SpectrumProblem& problem, const FeatureDistribution& dist,
                const PathConfig& config)
      : problem_(problem), dist_(dist), config_(config) {
    track_avg_ = has_series(config.track, Series::kAveraged);
    track_min_ = has_series(config.track, Series::kRunningMin);
    if (config.rotation) {
      const Eigen::Map<const Eigen::VectorXd> theta_star(problem.theta_star.data(),
                                                         static_cast<Eigen::Index>(problem.dim()));
      rotated_theta_star_ = *config.rotation * theta_star;
    }
  }

  ReplicateTrace run(int replicate) const {
    const std::size_t d = problem_.dim();
    const auto& cps = config_.checkpoints;
    ReplicateTrace trace;
    trace.values.assign(config_.track.size() * cps.size(), 0.0);

    std::mt19937_64 rng(replicate_seed(config_.base_seed, static_cast<std::uint64_t>(replicate)));
    FeatureSampler sampler(dist_);

    std::vector<double> theta(d, 0.0);
    std::vector<double> avg(d, 0.0);
    std::vector<double> x(d, 0.0);
    std::vector<double> scratch(d, 0.0);
    double min_risk = problem_.initial_risk();
    const double gamma = config_.gamma;
    const bool rotated = config_.rotation.has_value();
    const bool sparse = !rotated && dist_.kind() == DistributionKind::kCanonical;
    const auto scales = dist_.scales();
    const auto& theta_star = problem_.theta_star;

    std::size_t next = 0;
    for (std::int64_t t = 1; t <= config_.horizon; ++t) {
      bool finite = true;
      if (sparse) {
        const std::size_t i = sampler.sample_atom(rng);
        const double s = scales[i];
        const double y = theta_star[i] * s;
        theta[i] -= gamma * (theta[i] * s - y) * s;
        finite = std::isfinite(theta[i]);
      } else {
        sampler.sample(rng, x);
        if (rotated) {
          const Eigen::Map<const Eigen::VectorXd> xe(x.data(), static_cast<Eigen::Index>(d));
          Eigen::Map<Eigen::VectorXd>(scratch.data(), static_cast<Eigen::Index>(d)) =
              *config_.rotation * xe;
          std::swap(x, scratch);
        }
        const std::span<const double> target =
            rotated ? std::span<const double>(rotated_theta_star_.data(), d)
                    : std::span<const double>(theta_star);
        const double y = dot(target, x);
        const double g = gamma * (dot(theta, x) - y);
        for (std::size_t j = 0; j < d; ++j) {
          theta[j] -= g * x[j];
          finite &= std::isfinite(theta[j]);
        }
      }
      if (!finite) {
        trace.diverged_at = t;
        return trace;
      }
      if (track_avg_) {
        const double inv_t = 1.0 / static_cast<double>(t);
        for (std::size_t j = 0; j < d; ++j) avg[j] += (theta[j] - avg[j]) * inv_t;
      }
      if (track_min_) min_risk = std::min(min_risk, eval_risk(theta, scratch));

      if (next < cps.size() && cps[next] == t) {
        for (std::size_t s = 0; s < config_.track.size(); ++s) {
          double value = 0.0;
          switch (config_.track[s]) {
            case Series::kLast: value = eval_risk(theta, scratch); break;
            case Series::kAveraged: value = eval_risk(avg, scratch); break;
            case Series::kRunningMin: value = min_risk; break;
            default: break;
          }
          if (!std::isfinite(value)) {
            trace.diverged_at = t;
            return trace;
          }
          trace.values[s * cps.size() + next] = value;
        }
        ++next;
      }
    }
    return trace;
  }

 private:
  double eval_risk(std::span<const double> theta, std::vector<double>& scratch) const {
    if (!config_.rotation) return risk(problem_, theta);
    const auto d = static_cast<Eigen::Index>(problem_.dim());
    const Eigen::Map<const Eigen::VectorXd> v(theta.data(), d);
    Eigen::Map<Eigen::VectorXd>(scratch.data(), d) = config_.rotation->transpose() * v;
    return risk(problem_, scratch);
  }

  const SpectrumProblem& problem_;
  const FeatureDistribution& dist_;
  const PathConfig& config_;
  Eigen::VectorXd rotated_theta_star_;
  bool track_avg_ = false;
  bool track_min_ = false;
};

}  // namespace

double risk(const SpectrumProblem& problem, std::span<const double> theta) {
  if (theta.size() != problem.dim()) {
    throw DimensionMismatch("theta has " + std::to_string(theta.size()) +
                            " coordinates, expected " + std::to_string(problem.dim()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double dev = theta[i] - problem.theta_star[i];
    acc += problem.lambdas[i] * dev * dev;
  }
  return 0.5 * acc;
}

SgdState initial_state(const SpectrumProblem& problem) {
  SgdState state;
  state.theta.assign(problem.dim(), 0.0);
  state.theta_avg.assign(problem.dim(), 0.0);
  state.t = 0;
  state.min_risk_so_far = problem.initial_risk();
  return state;
}

void sgd_step(SgdState& state, const SpectrumProblem& problem, std::span<const double> x,
              double y, double gamma) {
  if (x.size() != problem.dim() || state.theta.size() != problem.dim()) {
    throw DimensionMismatch("sample and state must have the problem dimension");
  }
  if (!(gamma >= 0.0)) throw InvalidArgument("step size must be nonnegative");
  const double g = gamma * (dot(state.theta, x) - y);
  for (std::size_t j = 0; j < x.size(); ++j) {
    state.theta[j] -= g * x[j];
    if (!std::isfinite(state.theta[j])) throw DivergenceError(state.t + 1);
  }
  ++state.t;
  const double inv_t = 1.0 / static_cast<double>(state.t);
  for (std::size_t j = 0; j < x.size(); ++j) {
    state.theta_avg[j] += (state.theta[j] - state.theta_avg[j]) * inv_t;
  }
  state.min_risk_so_far = std::min(state.min_risk_so_far, risk(problem, state.theta));
}

std::uint64_t replicate_seed(std::uint64_t base_seed, std::uint64_t replicate) {
  std::uint64_t z = base_seed + (replicate + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

FeatureSampler::FeatureSampler(const FeatureDistribution& dist) : dist_(&dist) {
  if (dist.kind() == DistributionKind::kCanonical) {
    const auto probs = dist.probs();
    atoms_ = std::discrete_distribution<std::size_t>(probs.begin(), probs.end());
  }
}

void FeatureSampler::sample(std::mt19937_64& rng, std::span<double> x) {
  if (x.size() != dist_->dim()) throw DimensionMismatch("sample buffer has the wrong length");
  if (dist_->kind() == DistributionKind::kGaussian) {
    const auto sd = dist_->stddevs();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = sd[i] * normal_(rng);
    return;
  }
  std::fill(x.begin(), x.end(), 0.0);
  const std::size_t i = atoms_(rng);
  x[i] = dist_->scales()[i];
}

std::size_t FeatureSampler::sample_atom(std::mt19937_64& rng) {
  if (dist_->kind() != DistributionKind::kCanonical) {
    throw InvalidArgument("atom sampling requires the canonical law");
  }
  return atoms_(rng);
}

std::vector<RiskCurve> run_paths(const SpectrumProblem& problem,
                                 const FeatureDistribution& dist, const PathConfig& input) {
  problem.validate();
  if (dist.dim() != problem.dim()) throw DimensionMismatch("distribution and problem differ in d");
  if (input.horizon < 1) throw InvalidArgument("horizon must be at least 1");
  if (input.replicates < 1) throw InvalidArgument("at least one replicate is required");
  if (!(input.gamma >= 0.0) || !std::isfinite(input.gamma)) {
    throw InvalidArgument("step size must be finite and nonnegative");
  }
  if (input.track.empty()) throw InvalidArgument("no series requested");
  for (Series s : input.track) {
    if (is_deterministic(s)) {
      throw InvalidArgument("run_paths only produces last, averaged and running_min series");
    }
  }

  PathConfig config = input;
  if (config.checkpoints.empty()) config.checkpoints = log_checkpoints(config.horizon);
  validate_checkpoints(config.checkpoints, config.horizon);
  if (config.rotation) {
    const auto d = static_cast<Eigen::Index>(problem.dim());
    const Eigen::MatrixXd& q = *config.rotation;
    if (q.rows() != d || q.cols() != d) throw DimensionMismatch("rotation must be d x d");
    if ((q.transpose() * q - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10) {
      throw InvalidArgument("rotation matrix is not orthogonal");
    }
  }

  const PathSimulator simulator(problem, dist, config);
  const auto reps = static_cast<std::size_t>(config.replicates);
  std::vector<ReplicateTrace> traces(reps);
  const unsigned workers =
      std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(reps)));
  if (workers == 1) {
    for (std::size_t r = 0; r < reps; ++r) traces[r] = simulator.run(static_cast<int>(r));
  } else {
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t r = cursor++; r < reps; r = cursor++) {
          traces[r] = simulator.run(static_cast<int>(r));
        }
      });
    }
    for (auto& thread : pool) thread.join();
  }

  for (std::size_t r = 0; r < reps; ++r) {
    if (traces[r].diverged_at) throw DivergenceError(*traces[r].diverged_at, static_cast<int>(r));
  }

  const std::size_t n_cp = config.checkpoints.size();
  std::vector<RiskCurve> curves;
  curves.reserve(config.track.size());
  for (std::size_t s = 0; s < config.track.size(); ++s) {
    RiskCurve curve;
    curve.series = config.track[s];
    curve.checkpoints = config.checkpoints;
    curve.replicates = config.replicates;
    curve.values.assign(n_cp, 0.0);
    curve.stderrs.assign(n_cp, 0.0);
    for (std::size_t k = 0; k < n_cp; ++k) {
      double sum = 0.0;
      for (std::size_t r = 0; r < reps; ++r) sum += traces[r].values[s * n_cp + k];
      const double mean = sum / static_cast<double>(reps);
      double sq = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        const double dev = traces[r].values[s * n_cp + k] - mean;
        sq += dev * dev;
      }
      curve.values[k] = mean;
      curve.stderrs[k] =
          reps > 1 ? std::sqrt(sq / static_cast<double>(reps - 1) / static_cast<double>(reps))
                   : 0.0;
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

Eigen::MatrixXd random_rotation(std::size_t d, std::uint64_t seed) {
  if (d == 0) throw InvalidArgument("rotation dimension must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  // Sign fix so the distribution does not depend on the QR convention.
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

}  // namespace sgdlab
