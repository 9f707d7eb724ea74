#pragma once

#include <stdexcept>
#include <string>

namespace nplab {

/// Bad input: violated precondition, malformed config or text.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical contract failed (e.g. a significantly negative eigenvalue
/// where the theory guarantees positivity). Carries the offending value.
class NumericalContractError : public std::runtime_error {
 public:
  NumericalContractError(const std::string& what, double value)
      : std::runtime_error(what), value_(value) {}

  double value() const noexcept { return value_; }

 private:
  double value_;
};

}  // namespace nplab
