#pragma once

#include <stdexcept>
#include <string>

namespace dme {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector length or matrix shape does not fit the operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A scalar parameter is outside its valid range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical routine failed to converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The eigenvalue transform evaluated to a non-positive value on a retained
/// eigenvalue, so its pseudoinverse is undefined.
class DegenerateTransformError : public Error {
 public:
  using Error::Error;
};

/// Messages handed to a decoder do not belong to the same scheme or shape.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Correlation is undefined because every client vector is zero.
class UndefinedCorrelationError : public Error {
 public:
  using Error::Error;
};

/// Monte-Carlo calibration could not produce a positive scale.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file (IDX, CSV, cache, config).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace dme
