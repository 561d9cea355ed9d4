#pragma once

#include <stdexcept>
#include <string>

namespace qsat {

// Base class for everything thrown by the library. The CLI maps each
// subclass to a distinct exit code.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input text (DIMACS, checkpoint header, manifest).
struct ParseError : Error {
  ParseError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line(line) {}
  int line;
};

// Filesystem-level failure (missing file, short read, unwritable path).
struct IoError : Error {
  using Error::Error;
};

// Incompatible tensor/matrix shapes or index out of range.
struct ShapeError : Error {
  using Error::Error;
};

// Invalid configuration value or flag combination.
struct ConfigError : Error {
  using Error::Error;
};

// Data-dependent failure: oversized instance, stalled dataset generation,
// non-finite training loss, corrupted rational loss value.
struct DataError : Error {
  using Error::Error;
};

// Checkpoint version/format mismatch.
struct CheckpointError : Error {
  using Error::Error;
};

}  // namespace qsat
