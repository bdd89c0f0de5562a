#pragma once

#include <stdexcept>
#include <string>

namespace bestnet {

// Bad inputs: malformed network specs, out-of-range parameters, supercritical
// loads handed to the stationary solver. CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Iteration or integration failed to reach the requested tolerance.
// CLI maps this to exit code 3.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual(residual) {}
  double residual;
};

}  // namespace bestnet
