#include "config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sgdlab/bounds.hpp"

namespace sgdlab::cli {
namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::string_view where,
                    std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (std::string_view a : allowed) known = known || key == a;
    if (!known) throw ConfigError("unknown key '" + key + "' in " + std::string(where));
  }
}

double get_number(const json& obj, const char* key, std::string_view where) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(std::string(where) + "." + key + " must be a number");
  return v.get<double>();
}

std::int64_t get_integer(const json& obj, const char* key, std::string_view where) {
  const json& v = obj.at(key);
  if (v.is_number_integer()) return v.get<std::int64_t>();
  // Accept integral floats such as 1e6.
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::floor(x) == x && std::abs(x) < 9.0e15) return static_cast<std::int64_t>(x);
  }
  throw ConfigError(std::string(where) + "." + key + " must be an integer");
}

std::string get_string(const json& obj, const char* key, std::string_view where) {
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(std::string(where) + "." + key + " must be a string");
  return v.get<std::string>();
}

void parse_problem(const json& p, ExperimentConfig& cfg) {
  reject_unknown(p, "problem", {"d", "alpha", "beta", "optimum_mode", "eps"});
  if (!p.contains("d")) throw ConfigError("problem.d is required");
  const std::int64_t d = get_integer(p, "d", "problem");
  if (d < 1) throw ConfigError("problem.d must be >= 1");
  cfg.d = static_cast<std::size_t>(d);
  if (p.contains("alpha")) cfg.alpha = get_number(p, "alpha", "problem");
  if (p.contains("beta")) cfg.beta = get_number(p, "beta", "problem");
  if (p.contains("optimum_mode")) {
    const auto mode = parse_optimum_mode(get_string(p, "optimum_mode", "problem"));
    if (!mode) throw ConfigError("problem.optimum_mode must be 'fig1' or 'tight'");
    cfg.optimum_mode = *mode;
  }
  if (p.contains("eps")) cfg.eps = get_number(p, "eps", "problem");
  if (!(cfg.alpha >= 0.0 && cfg.alpha < 1.0)) throw ConfigError("problem.alpha must be in [0, 1)");
  if (!(cfg.beta > -1.0)) throw ConfigError("problem.beta must be > -1");
  if (!(cfg.eps > 0.0)) throw ConfigError("problem.eps must be > 0");
}

void parse_distribution(const json& p, ExperimentConfig& cfg) {
  reject_unknown(p, "distribution", {"kind", "prob_exponent"});
  if (p.contains("kind")) {
    const auto kind = parse_distribution_kind(get_string(p, "kind", "distribution"));
    if (!kind) throw ConfigError("distribution.kind must be 'gaussian' or 'canonical'");
    cfg.kind = *kind;
  }
  if (p.contains("prob_exponent")) {
    cfg.prob_exponent = get_number(p, "prob_exponent", "distribution");
  }
}

void parse_gamma(const json& p, ExperimentConfig& cfg) {
  reject_unknown(p, "gamma", {"mode", "value"});
  if (!p.contains("mode")) throw ConfigError("gamma.mode is required");
  const std::string mode = get_string(p, "mode", "gamma");
  if (mode == "explicit") cfg.gamma_mode = GammaMode::kExplicit;
  else if (mode == "thm1") cfg.gamma_mode = GammaMode::kThm1;
  else if (mode == "thm2") cfg.gamma_mode = GammaMode::kThm2;
  else if (mode == "thm3") cfg.gamma_mode = GammaMode::kThm3;
  else if (mode == "half_inv_trace") cfg.gamma_mode = GammaMode::kHalfInvTrace;
  else throw ConfigError("gamma.mode must be explicit|thm1|thm2|thm3|half_inv_trace");
  if (p.contains("value")) cfg.gamma_value = get_number(p, "value", "gamma");
  if (cfg.gamma_mode == GammaMode::kExplicit) {
    if (!cfg.gamma_value) throw ConfigError("gamma.value is required in explicit mode");
    if (!std::isfinite(*cfg.gamma_value) || *cfg.gamma_value < 0.0) {
      throw ConfigError("gamma.value must be finite and >= 0");
    }
  } else if (cfg.gamma_value) {
    throw ConfigError("gamma.value is only allowed in explicit mode");
  }
}

void parse_checkpoints(const json& p, ExperimentConfig& cfg) {
  reject_unknown(p, "checkpoints", {"count", "scale"});
  if (p.contains("count")) {
    const std::int64_t count = get_integer(p, "count", "checkpoints");
    if (count < 2) throw ConfigError("checkpoints.count must be >= 2");
    cfg.checkpoint_count = static_cast<std::size_t>(count);
  }
  if (p.contains("scale") && get_string(p, "scale", "checkpoints") != "log") {
    throw ConfigError("checkpoints.scale must be 'log'");
  }
}

void parse_outputs(const json& p, ExperimentConfig& cfg) {
  reject_unknown(p, "outputs", {"csv_path", "svg_path"});
  if (p.contains("csv_path")) cfg.csv_path = get_string(p, "csv_path", "outputs");
  if (p.contains("svg_path")) cfg.svg_path = get_string(p, "svg_path", "outputs");
  if (cfg.csv_path.empty() && p.contains("csv_path")) {
    throw ConfigError("outputs.csv_path must not be empty");
  }
}

}  // namespace

std::string_view gamma_mode_name(GammaMode mode) {
  switch (mode) {
    case GammaMode::kExplicit: return "explicit";
    case GammaMode::kThm1: return "thm1";
    case GammaMode::kThm2: return "thm2";
    case GammaMode::kThm3: return "thm3";
    case GammaMode::kHalfInvTrace: return "half_inv_trace";
  }
  return "explicit";
}

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    reject_unknown(root, "config",
                   {"run_id", "problem", "distribution", "gamma", "horizon", "replicates",
                    "base_seed", "checkpoints", "series", "outputs"});
    if (!root.contains("problem")) throw ConfigError("config.problem is required");
    parse_problem(root.at("problem"), cfg);
    if (root.contains("run_id")) cfg.run_id = get_string(root, "run_id", "config");
    if (root.contains("distribution")) parse_distribution(root.at("distribution"), cfg);
    if (root.contains("gamma")) parse_gamma(root.at("gamma"), cfg);
    if (root.contains("horizon")) {
      cfg.horizon = get_integer(root, "horizon", "config");
      if (cfg.horizon < 1) throw ConfigError("horizon must be >= 1");
    }
    if (root.contains("replicates")) {
      const std::int64_t r = get_integer(root, "replicates", "config");
      if (r < 1 || r > 100'000'000) throw ConfigError("replicates must be in [1, 1e8]");
      cfg.replicates = static_cast<int>(r);
    }
    if (root.contains("base_seed")) {
      const json& s = root.at("base_seed");
      if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
        throw ConfigError("base_seed must be a nonnegative integer");
      }
      cfg.base_seed = s.get<std::uint64_t>();
    }
    if (root.contains("checkpoints")) parse_checkpoints(root.at("checkpoints"), cfg);
    if (root.contains("series")) {
      const json& s = root.at("series");
      if (!s.is_array()) throw ConfigError("series must be an array of names");
      std::set<Series> seen;
      for (const json& item : s) {
        if (!item.is_string()) throw ConfigError("series entries must be strings");
        const auto parsed = parse_series(item.get<std::string>());
        if (!parsed) throw ConfigError("unknown series '" + item.get<std::string>() + "'");
        if (seen.insert(*parsed).second) cfg.series.push_back(*parsed);
      }
    }
    if (root.contains("outputs")) parse_outputs(root.at("outputs"), cfg);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

SpectrumProblem build_problem(const ExperimentConfig& config) {
  try {
    return build_power_law(config.d, config.alpha, config.beta, config.optimum_mode, config.eps);
  } catch (const NumericalError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid problem: ") + e.what());
  }
}

FeatureDistribution build_distribution(const ExperimentConfig& config,
                                       const SpectrumProblem& problem) {
  try {
    return make_distribution(problem, config.kind, config.prob_exponent);
  } catch (const NumericalError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid distribution: ") + e.what());
  }
}

ResolvedGamma resolve_gamma(const ExperimentConfig& config, const SpectrumProblem& problem,
                            const FeatureDistribution& dist) {
  ResolvedGamma out;
  switch (config.gamma_mode) {
    case GammaMode::kExplicit:
      if (!config.gamma_value) throw ConfigError("gamma.value is required in explicit mode");
      out.gamma = *config.gamma_value;
      break;
    case GammaMode::kHalfInvTrace:
      out.gamma = 1.0 / (2.0 * problem.trace());
      break;
    case GammaMode::kThm1:
    case GammaMode::kThm2:
    case GammaMode::kThm3: {
      const Theorem th = config.gamma_mode == GammaMode::kThm1   ? Theorem::kThm1
                         : config.gamma_mode == GammaMode::kThm2 ? Theorem::kThm2
                                                                 : Theorem::kThm3;
      const ProblemConstants constants =
          compute_constants(problem, dist, config.alpha, config.beta);
      try {
        out.gamma = step_size_for(th, constants, config.alpha, config.horizon);
      } catch (const NumericalError&) {
        throw;
      } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("cannot derive step size: ") + e.what());
      }
      break;
    }
  }
  out.exceeds_cap = out.gamma > 1.0 / (4.0 * problem.lambda_max()) * (1.0 + 1e-12);
  return out;
}

}  // namespace sgdlab::cli
