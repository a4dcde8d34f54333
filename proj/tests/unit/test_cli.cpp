#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "commands.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "svg.hpp"

using namespace sgdlab;
using namespace sgdlab::cli;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sgdlab_test_" + name + "_" +
                                                     std::to_string(std::random_device{}()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

const char* kSimulateConfig = R"({
  "run_id": "sim",
  "problem": {"d": 20, "alpha": 0.5, "beta": 0.0, "optimum_mode": "tight"},
  "distribution": {"kind": "gaussian"},
  "gamma": {"mode": "half_inv_trace"},
  "horizon": 300,
  "replicates": 6,
  "base_seed": 17,
  "checkpoints": {"count": 20, "scale": "log"},
  "series": ["last", "averaged", "running_min", "exact"],
  "outputs": {"csv_path": "sim.csv", "svg_path": "sim.svg"}
})";

int run_binary(const std::string& args) {
  const std::string cmd = std::string(SGDLAB_BINARY) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesFullDocument) {
  const auto cfg = parse_config(kSimulateConfig);
  EXPECT_EQ(cfg.run_id, "sim");
  EXPECT_EQ(cfg.d, 20u);
  EXPECT_EQ(cfg.alpha, 0.5);
  EXPECT_EQ(cfg.optimum_mode, OptimumMode::kTight);
  EXPECT_EQ(cfg.kind, DistributionKind::kGaussian);
  EXPECT_EQ(cfg.gamma_mode, GammaMode::kHalfInvTrace);
  EXPECT_EQ(cfg.horizon, 300);
  EXPECT_EQ(cfg.replicates, 6);
  EXPECT_EQ(cfg.base_seed, 17u);
  EXPECT_EQ(cfg.checkpoint_count, 20u);
  ASSERT_EQ(cfg.series.size(), 4u);
  EXPECT_EQ(cfg.series[3], Series::kExact);
  EXPECT_EQ(cfg.csv_path, "sim.csv");
  EXPECT_EQ(cfg.svg_path, "sim.svg");
}

TEST(Config, AppliesDefaults) {
  const auto cfg = parse_config(R"({"problem": {"d": 3}})");
  EXPECT_EQ(cfg.gamma_mode, GammaMode::kHalfInvTrace);
  EXPECT_EQ(cfg.optimum_mode, OptimumMode::kTight);
  EXPECT_EQ(cfg.horizon, 1000);
  EXPECT_EQ(cfg.replicates, 10);
  EXPECT_EQ(cfg.checkpoint_count, 64u);
  EXPECT_FALSE(cfg.svg_path.has_value());
}

TEST(Config, RejectsInvalidDocuments) {
  const char* bad[] = {
      "not json",
      R"({})",
      R"({"problem": {"d": 3}, "extra": 1})",
      R"({"problem": {"d": 3, "gamma": 1}})",
      R"({"problem": {"d": 0}})",
      R"({"problem": {"d": 3.5}})",
      R"({"problem": {"d": 3, "alpha": 1.0}})",
      R"({"problem": {"d": 3, "optimum_mode": "loose"}})",
      R"({"problem": {"d": 3}, "distribution": {"kind": "laplace"}})",
      R"({"problem": {"d": 3}, "gamma": {"mode": "explicit"}})",
      R"({"problem": {"d": 3}, "gamma": {"mode": "thm3", "value": 0.1}})",
      R"({"problem": {"d": 3}, "gamma": {"mode": "sometimes"}})",
      R"({"problem": {"d": 3}, "horizon": 0})",
      R"({"problem": {"d": 3}, "replicates": 0})",
      R"({"problem": {"d": 3}, "checkpoints": {"scale": "linear"}})",
      R"({"problem": {"d": 3}, "series": ["bogus"]})",
      R"({"problem": {"d": 3}, "outputs": {"png_path": "x.png"}})",
  };
  for (const char* text : bad) {
    EXPECT_THROW(parse_config(text), ConfigError) << text;
  }
}

TEST(Config, ResolvesStepSizes) {
  auto cfg = parse_config(R"({"problem": {"d": 10, "alpha": 0.5}})");
  const auto p = build_problem(cfg);
  const auto dist = build_distribution(cfg, p);
  const auto half = resolve_gamma(cfg, p, dist);
  EXPECT_DOUBLE_EQ(half.gamma, 1.0 / (2.0 * p.trace()));
  cfg = parse_config(R"({"problem": {"d": 10, "alpha": 0.5}, "gamma": {"mode": "explicit", "value": 0.5}})");
  const auto explicit_gamma = resolve_gamma(cfg, p, dist);
  EXPECT_EQ(explicit_gamma.gamma, 0.5);
  EXPECT_TRUE(explicit_gamma.exceeds_cap);
  cfg.gamma_value = 0.1;
  EXPECT_FALSE(resolve_gamma(cfg, p, dist).exceeds_cap);
}

TEST(Config, BuildsCanonicalDistribution) {
  const auto cfg = parse_config(
      R"({"problem": {"d": 2, "alpha": 0.0}, "distribution": {"kind": "canonical", "prob_exponent": 1.0}})");
  const auto p = build_problem(cfg);
  const auto dist = build_distribution(cfg, p);
  EXPECT_EQ(dist.kind(), DistributionKind::kCanonical);
  EXPECT_NEAR(dist.probs()[0], 1.0 / (1.0 + std::pow(2.0, -1.0)) * 1.0, 1e-12);
}

TEST(Csv, FormatsRowsWithFullPrecision) {
  RiskCurve mc;
  mc.series = Series::kLast;
  mc.checkpoints = {1, 10};
  mc.values = {0.1, 1.0 / 3.0};
  mc.stderrs = {0.0, 0.25};
  mc.replicates = 4;
  RiskCurve exact;
  exact.series = Series::kExact;
  exact.checkpoints = {1, 10};
  exact.values = {0.5, 0.125};
  const std::vector<LabeledCurve> curves = {{"run", &mc}, {"run", &exact}};
  const auto lines = lines_of(render_csv(curves));
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "run_id,series,t,value,stderr,replicates");
  EXPECT_EQ(lines[2], "run,last,10,0.33333333333333331,0.25,4");
  EXPECT_EQ(lines[3], "run,exact,1,0.5,,0");
  EXPECT_EQ(std::stod(split(lines[2])[3]), 1.0 / 3.0);
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

TEST(Svg, OnePolylinePerSeries) {
  RiskCurve a;
  a.series = Series::kExact;
  a.checkpoints = {1, 10, 100};
  a.values = {1.0, 0.1, 0.0};
  RiskCurve b = a;
  b.series = Series::kBoundThm3;
  b.values = {2.0, 0.2, 0.02};
  const std::vector<const RiskCurve*> ptrs = {&a, &b};
  SvgOptions opts;
  opts.title = "demo";
  opts.marker_t = 30.0;
  const std::string svg = render_svg(ptrs, opts);
  EXPECT_EQ(svg.rfind("<svg", 0) == 0 || svg.find("<svg") != std::string::npos, true);
  EXPECT_EQ(count_of(svg, "<polyline"), 2u);
  EXPECT_EQ(count_of(svg, "data-series=\"exact\""), 1u);
  EXPECT_EQ(count_of(svg, "data-series=\"bound_thm3\""), 1u);
  EXPECT_EQ(count_of(svg, "<svg"), count_of(svg, "</svg>"));
  EXPECT_EQ(count_of(svg, "<g"), count_of(svg, "</g>"));
  EXPECT_NE(svg.find("demo"), std::string::npos);
}

TEST(Commands, SimulateWritesTidyCsvAndReproduces) {
  const fs::path dir = fresh_dir("simulate");
  const auto cfg = parse_config(kSimulateConfig);
  CommandOptions opts;
  opts.out_dir = dir;
  std::ostringstream log;
  cmd_simulate(cfg, opts, log);
  const std::string first = slurp(dir / "sim.csv");
  const std::string first_svg = slurp(dir / "sim.svg");
  ASSERT_TRUE(fs::exists(dir / "problem.json"));
  const auto lines = lines_of(first);
  ASSERT_GT(lines.size(), 1u);
  std::map<std::string, std::vector<std::int64_t>> ts;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i]);
    ASSERT_EQ(cells.size(), 6u) << lines[i];
    EXPECT_EQ(cells[0], "sim");
    ts[cells[1]].push_back(std::stoll(cells[2]));
    if (cells[1] == "exact") {
      EXPECT_EQ(cells[4], "");
      EXPECT_EQ(cells[5], "0");
    } else {
      EXPECT_EQ(cells[5], "6");
    }
  }
  EXPECT_EQ(ts.size(), 4u);
  for (const auto& [series, values] : ts) {
    for (std::size_t i = 1; i < values.size(); ++i) EXPECT_LT(values[i - 1], values[i]) << series;
    EXPECT_EQ(values.back(), 300);
  }
  EXPECT_EQ(count_of(first_svg, "<polyline"), 4u);

  opts.threads = 3;
  cmd_simulate(cfg, opts, log);
  EXPECT_EQ(slurp(dir / "sim.csv"), first);
  EXPECT_EQ(slurp(dir / "sim.svg"), first_svg);

  opts.seed = 18;
  cmd_simulate(cfg, opts, log);
  EXPECT_NE(slurp(dir / "sim.csv"), first);
  fs::remove_all(dir);
}

TEST(Commands, ZeroStepSimulationKeepsInitialRisk) {
  const fs::path dir = fresh_dir("zero");
  const auto cfg = parse_config(R"({
    "problem": {"d": 5, "alpha": 0.5},
    "gamma": {"mode": "explicit", "value": 0.0},
    "horizon": 50, "replicates": 3, "series": ["last"],
    "outputs": {"csv_path": "z.csv"}})");
  CommandOptions opts;
  opts.out_dir = dir;
  std::ostringstream log;
  cmd_simulate(cfg, opts, log);
  const double r0 = build_problem(cfg).initial_risk();
  const auto lines = lines_of(slurp(dir / "z.csv"));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    EXPECT_DOUBLE_EQ(std::stod(split(lines[i])[3]), r0);
  }
  fs::remove_all(dir);
}

TEST(Commands, PropagateScalarWithForcedStep) {
  const fs::path dir = fresh_dir("propagate");
  const auto cfg = parse_config(R"({
    "problem": {"d": 1, "alpha": 0.5},
    "distribution": {"kind": "canonical"},
    "gamma": {"mode": "explicit", "value": 0.5},
    "horizon": 4, "checkpoints": {"count": 4}})");
  CommandOptions opts;
  opts.out_dir = dir;
  std::ostringstream log;
  EXPECT_THROW(cmd_propagate(cfg, opts, log), InvalidArgument);
  opts.force_gamma = true;
  cmd_propagate(cfg, opts, log);
  const auto lines = lines_of(slurp(dir / "propagate.csv"));
  ASSERT_EQ(lines.size(), 5u);
  for (int t = 1; t <= 4; ++t) {
    const auto cells = split(lines[t]);
    EXPECT_EQ(cells[1], "exact");
    EXPECT_EQ(std::stoll(cells[2]), t);
    EXPECT_DOUBLE_EQ(std::stod(cells[3]), 0.5 * std::pow(0.25, t));
  }
  fs::remove_all(dir);
}

TEST(Commands, BoundsReportsPositiveMargins) {
  const fs::path dir = fresh_dir("bounds");
  const auto cfg = parse_config(R"({
    "problem": {"d": 50, "alpha": 0.5, "beta": 0.0},
    "distribution": {"kind": "canonical"},
    "gamma": {"mode": "thm3"},
    "horizon": 1000, "checkpoints": {"count": 16},
    "series": ["exact", "bound_thm3"],
    "outputs": {"csv_path": "b.csv"}})");
  CommandOptions opts;
  opts.out_dir = dir;
  std::ostringstream log;
  cmd_bounds(cfg, opts, log);
  const auto lines = lines_of(slurp(dir / "b.csv"));
  std::map<std::int64_t, double> exact, bound;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i]);
    (cells[1] == "exact" ? exact : bound)[std::stoll(cells[2])] = std::stod(cells[3]);
  }
  ASSERT_FALSE(bound.empty());
  for (const auto& [t, b] : bound) {
    ASSERT_TRUE(exact.count(t));
    EXPECT_GE(b, exact[t]);
  }
  fs::remove_all(dir);
}

TEST(Commands, LemmasPass) {
  const fs::path dir = fresh_dir("lemmas");
  CommandOptions opts;
  opts.out_dir = dir;
  std::ostringstream log;
  EXPECT_TRUE(cmd_lemmas(opts, log));
  const auto lines = lines_of(slurp(dir / "lemmas.csv"));
  EXPECT_GT(lines.size(), 100u);
  fs::remove_all(dir);
}

TEST(Binary, ExitCodes) {
  const fs::path dir = fresh_dir("binary");
  const fs::path good = dir / "good.json";
  const fs::path unknown = dir / "unknown.json";
  const fs::path diverge = dir / "diverge.json";
  std::ofstream(good) << R"({"problem": {"d": 4, "alpha": 0.5}, "horizon": 20})";
  std::ofstream(unknown) << R"({"problem": {"d": 4, "colour": "red"}})";
  std::ofstream(diverge) << R"({"problem": {"d": 4, "alpha": 0.5},
    "gamma": {"mode": "explicit", "value": 50.0}, "horizon": 100000})";
  const std::string out = " --out " + (dir / "out").string();
  EXPECT_EQ(run_binary("propagate --config " + good.string() + out), 0);
  EXPECT_EQ(run_binary("propagate --config " + unknown.string() + out), 1);
  EXPECT_EQ(run_binary("propagate --config " + (dir / "missing.json").string() + out), 1);
  EXPECT_EQ(run_binary("propagate --config " + diverge.string() + out), 1);
  EXPECT_EQ(run_binary("propagate --force-gamma --config " + diverge.string() + out), 2);
  EXPECT_EQ(run_binary("nonsense"), 1);
  fs::remove_all(dir);
}
