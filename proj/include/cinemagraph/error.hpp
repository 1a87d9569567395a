#pragma once

#include <stdexcept>
#include <string>

namespace cinemagraph {

/// Base of every error thrown by the library. The CLI maps the concrete
/// subclass onto a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed arguments outside an operation's domain (k > tokens,
/// unknown phrase, bad threshold).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Two rasters that must share a shape do not.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// File contents violate the on-disk format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Eigensolver failure or non-finite intermediate values.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cinemagraph
