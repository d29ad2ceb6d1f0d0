#pragma once

#include <stdexcept>
#include <string>

namespace charger {

/// Precondition or input validation failure. The CLI maps it to exit status 1.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Numeric failure (infeasible point, divergence, missing crossover, ...). Exit status 2.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InfeasibleOperatingPoint : public NumericError {
public:
  using NumericError::NumericError;
};

class DivergenceError : public NumericError {
public:
  DivergenceError(double t, const std::string& what)
      : NumericError(what), time_(t) {}
  double time() const noexcept { return time_; }

private:
  double time_;
};

}  // namespace charger
