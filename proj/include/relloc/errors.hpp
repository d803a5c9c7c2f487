#pragma once

#include <stdexcept>
#include <string>

namespace relloc {

/// Raised when a truncated Fock basis cannot hold the ensemble tail.
class CutoffOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for configurations a module cannot handle (invalid shapes,
/// unsupported parameter combinations, region too small...).
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Domain errors (eps outside (0,1), mu <= 0, ...) use std::domain_error.

/// Raised when a peak is requested for a record with no detections.
class NoPeakError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when an internal cross-check between two independent computations fails.
class NumericalValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace relloc
