#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ecoevo {

/// A caller broke a documented precondition (length mismatch, unnormalized input, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A density with nonpositive mass was handed to an operation that divides by it.
class DegenerateStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid scenario, scheme or transform configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A hypothesis audit failed and no override was given.
class AuditError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// NaN/inf or a solver that failed to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The explicit scheme produced a negative node value.
class StabilityError : public NumericalError {
 public:
  StabilityError(const std::string& what, std::size_t step)
      : NumericalError(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// A theoretical assumption (A0-A2, a band, a bracket) does not hold for the input.
class AssumptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the canonical-equation trajectory leaves the band where I(x) is defined.
class BandExitError : public AssumptionError {
 public:
  using AssumptionError::AssumptionError;
};

/// A population (or the predator) reached zero.
class ExtinctionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ecoevo
