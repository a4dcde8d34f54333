#include "lemma_grids.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "sgdlab/bounds.hpp"

namespace sgdlab::cli {
namespace {

LemmaSummary& summary_for(LemmaGridReport& report, const std::string& lemma) {
  for (LemmaSummary& s : report.summaries) {
    if (s.lemma == lemma) return s;
  }
  report.summaries.push_back({lemma, 0, 0, std::numeric_limits<double>::infinity()});
  return report.summaries.back();
}

void record(LemmaGridReport& report, LemmaRow row) {
  LemmaSummary& s = summary_for(report, row.lemma);
  ++s.cases;
  if (row.margin < 0.0 || std::isnan(row.margin)) ++s.violations;
  s.min_margin = std::min(s.min_margin, row.margin);
  report.rows.push_back(std::move(row));
}

}  // namespace

bool LemmaGridReport::all_nonnegative() const {
  for (const LemmaSummary& s : summaries) {
    if (s.violations > 0) return false;
  }
  return !summaries.empty();
}

LemmaGridReport run_lemma_grids(std::uint64_t seed) {
  LemmaGridReport report;

  for (int k = 2; k <= 40; ++k) {
    const double x = std::ldexp(1.0, -k);
    for (std::int64_t n : {1, 2, 5, 10, 100, 1000, 10000, 100000}) {
      LemmaRow row{.lemma = "lemma3", .x = x, .n = n};
      row.value = s_n_exact(x, n);
      row.margin = lemma3_check(x, n);
      record(report, std::move(row));
    }
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    double x = unit(rng);
    while (x == 0.0) x = unit(rng);
    const double r = 5.0 * (1.0 - unit(rng));  // (0, 5]
    // log-uniform t in [1, 1e6]
    const auto t = static_cast<std::int64_t>(std::floor(std::pow(10.0, 6.0 * unit(rng))));
    const std::int64_t tt = std::clamp<std::int64_t>(t, 1, 1'000'000);
    LemmaRow row{.lemma = "lemma4", .x = x, .n = tt, .r = r};
    row.value = std::exp(r * std::log(x) + static_cast<double>(tt) * std::log1p(-x));
    row.margin = lemma4_check(x, static_cast<double>(tt), r);
    record(report, std::move(row));
  }

  for (int a = 1; a <= 9; ++a) {
    const double alpha = 0.1 * a;
    for (double beta : {-0.5, 0.0, 0.5, 1.0, 2.0}) {
      for (std::int64_t big_t : {2, 10, 100, 1000}) {
        const Lemma5Result res = lemma5_exact_and_check(alpha, beta, big_t);
        const double swapped = s_t_sum(beta, alpha, big_t);
        report.lemma5_max_asymmetry =
            std::max(report.lemma5_max_asymmetry, std::abs(res.s_t - swapped) / res.s_t);
        LemmaRow row{.lemma = "lemma5", .n = big_t, .alpha = alpha, .beta = beta};
        row.value = res.s_t;
        row.margin = res.margin;
        record(report, std::move(row));
      }
    }
  }
  return report;
}

}  // namespace sgdlab::cli
