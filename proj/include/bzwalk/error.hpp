#pragma once

#include <stdexcept>
#include <string>

namespace bzwalk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied parameter violates a documented precondition.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed (eigen-solver failure, NaN blow-up, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Attractive mean-field dynamics ran away (peak density exploded).
class CollapseError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Adjacent Bloch states are (nearly) orthogonal; the connection is undefined.
class GaugeSingularity : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// An open-subregion walk tried to cross the zone edge.
class BoundaryViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace bzwalk
