#pragma once

#include <stdexcept>
#include <string>

namespace aceg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Raised when a value that must stay finite becomes NaN or Inf.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Malformed serialized data (bad magic, unknown schema, bad header).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Serialized payload shorter or longer than its header announces.
class LengthMismatchError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Rank-deficient or otherwise unsolvable geometric system.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

}  // namespace aceg
