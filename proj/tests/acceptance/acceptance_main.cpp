// Runs every acceptance criterion and prints one PASS/FAIL line each.
#include <cstdlib>
#include <iostream>
#include <string>

#include "verify.hpp"

int main() {
  unsigned threads = 1;
  if (const char* env = std::getenv("SGDLAB_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) threads = static_cast<unsigned>(n);
  }
  const auto results =
      sgdlab::cli::run_acceptance(sgdlab::cli::VerifyLevel::kFull, threads, &std::cout);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::cout << results.size() - static_cast<std::size_t>(failed) << "/" << results.size()
            << " criteria passed" << std::endl;
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
