#pragma once

#include <stdexcept>
#include <string>

namespace rmra {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: wrong shape, out-of-range parameter, malformed file.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure on otherwise well-formed input.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A scalar function was evaluated outside its domain on some eigenvalue.
class DomainError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Matrix too ill-conditioned for the requested congruence chain.
class ConditioningError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace rmra
