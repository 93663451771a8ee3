#pragma once

#include <stdexcept>
#include <string>

namespace modev {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values or failed convergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A tilt or argument outside the admissible domain (e.g. the mgf radius).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Bad arguments: negative inputs, s > t, t outside [0,1], malformed shapes.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Matrix expected to be positive semidefinite is not.
class NotPsdError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Kernel cannot produce exponentially tilted draws.
class UnsupportedTiltError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration or model document.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace modev
