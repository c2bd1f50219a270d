#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace pmiflow {

/// Raised for precondition violations on public operations.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A Gaussian component has zero spread at the requested time.
class SingularField : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A velocity or state became non-finite during integration.
class NumericFailure : public std::runtime_error {
 public:
  explicit NumericFailure(const std::string& what,
                          std::optional<std::size_t> step = std::nullopt)
      : std::runtime_error(step ? what + " (step " + std::to_string(*step) + ")"
                                : what),
        step_(step) {}

  std::optional<std::size_t> step() const noexcept { return step_; }

 private:
  std::optional<std::size_t> step_;
};

/// The reference integrator could not produce a trustworthy answer.
class OracleFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pmiflow
