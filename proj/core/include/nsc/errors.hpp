#pragma once

#include <stdexcept>
#include <string>

namespace nsc {

/// Failure of a numerical procedure on valid input (non-convergence,
/// positivity violation, separation, singular systems). The CLI maps these to
/// exit code 2; malformed input is reported with std::invalid_argument.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class PositivityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SeparationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A pattern needed by an estimating equation has no support in the data.
class SupportError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace nsc
