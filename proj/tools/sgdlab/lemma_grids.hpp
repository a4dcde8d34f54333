#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sgdlab::cli {

struct LemmaRow {
  std::string lemma;
  double x = 0.0;
  std::int64_t n = 0;  // n for lemma 3, t for lemma 4, T for lemma 5
  double r = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double value = 0.0;  // S_n(x), x^r(1-x)^t or S_T(alpha, beta)
  double margin = 0.0;
};

struct LemmaSummary {
  std::string lemma;
  int cases = 0;
  int violations = 0;
  double min_margin = 0.0;
};

struct LemmaGridReport {
  std::vector<LemmaRow> rows;
  std::vector<LemmaSummary> summaries;
  double lemma5_max_asymmetry = 0.0;  // max |S_T(a,b) - S_T(b,a)| / S_T(a,b)

  bool all_nonnegative() const;
};

/// lemma3 on x = 2^-k (k = 2..40) x n in {1,2,5,10,1e2,1e3,1e4,1e5};
/// lemma 4 on 1e4 seeded random (x, t, r) with r in (0,5], t <= 1e6;
/// lemma 5 on alpha in {0.1..0.9} x beta in {-0.5,0,0.5,1,2} x T in {2,10,1e2,1e3}.
LemmaGridReport run_lemma_grids(std::uint64_t seed = 20240601);

}  // namespace sgdlab::cli
