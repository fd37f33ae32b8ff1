#pragma once

#include <stdexcept>
#include <string>

namespace unhaze {

// Error taxonomy. The CLI maps each family onto a distinct exit code.

/// Input violates an operation's precondition (shape mismatch, out-of-range value, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Data could not be read, written, or decoded.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file exists but is not in a supported format.
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

/// No checkpoint manifest in the requested directory.
class MissingCheckpoint : public DataError {
 public:
  using DataError::DataError;
};

/// Configuration is malformed: unknown key, bad value, missing required entry.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite or runaway loss.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace unhaze
