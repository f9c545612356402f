#ifndef MSE_ADJUST_ERRORS_HPP_
#define MSE_ADJUST_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace mse_adjust {

// Malformed input (bad graph, unknown node, overlapping arguments) is reported
// with std::invalid_argument. Everything below is a property of the model or
// the data and maps to exit status 1 in the CLI.

class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Design matrix is rank deficient, or A is perfectly explained by K.
class CollinearityError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// n is too small for the requested adjustment set.
class SampleSizeTooSmallError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A population covariance block is numerically singular.
class DegenerateModelError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Too many bootstrap resamples had to be redrawn.
class BootstrapDegeneracyError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Refusal to enumerate paths or subsets beyond the configured limits.
class EnumerationLimitError : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace mse_adjust

#endif  // MSE_ADJUST_ERRORS_HPP_
