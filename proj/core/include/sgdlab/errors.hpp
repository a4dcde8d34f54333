#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace sgdlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition was violated by the caller.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// A quantity left the representable floating-point range.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A recursion produced a non-finite value. `step` is the first step whose
// result was non-finite; `replicate` is set for Monte Carlo runs.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(std::int64_t step, std::optional<int> replicate = std::nullopt)
      : NumericalError(Describe(step, replicate)),
        step_(step),
        replicate_(replicate) {}

  std::int64_t step() const { return step_; }
  std::optional<int> replicate() const { return replicate_; }

 private:
  static std::string Describe(std::int64_t step, std::optional<int> replicate) {
    std::string msg = "divergence detected at step " + std::to_string(step);
    if (replicate) msg += " in replicate " + std::to_string(*replicate);
    return msg;
  }

  std::int64_t step_;
  std::optional<int> replicate_;
};

}  // namespace sgdlab
