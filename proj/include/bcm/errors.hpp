#pragma once

#include <stdexcept>
#include <string>

namespace bcm {

/// Shape or index mismatch between fields and their grid.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition on values was violated (negative D, c < 0, ...).
class ContractError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid run configuration: bad keys, out-of-range parameters, unstable dt.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown during a run (NaN, occupancy blow-up).
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::string last_good = {})
      : std::runtime_error(what), last_good_snapshot(std::move(last_good)) {}
  std::string last_good_snapshot;
};

/// An iterative stage hit its step cap before meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), final_residual(residual) {}
  double final_residual;
};

}  // namespace bcm
