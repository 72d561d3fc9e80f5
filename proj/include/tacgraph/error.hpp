#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tacgraph {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration (unknown enum value, unknown key, bad range).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A caller-supplied argument violates an operation precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Degenerate or inconsistent geometry (collinear input, unbounded cell).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Matrix or feature dimensions do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Blob detection found a different number of markers than expected.
class DetectionError : public Error {
 public:
  DetectionError(std::size_t expected, std::size_t found)
      : Error("blob detection count mismatch: expected " + std::to_string(expected) +
              ", found " + std::to_string(found)),
        expected_(expected),
        found_(found) {}

  std::size_t expected() const { return expected_; }
  std::size_t found() const { return found_; }

 private:
  std::size_t expected_;
  std::size_t found_;
};

/// Non-finite values appeared in a forward pass.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, int layer) : Error(what), layer_(layer) {}
  int layer() const { return layer_; }

 private:
  int layer_;
};

/// Optimisation diverged.
class TrainingError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// File written by an incompatible format version.
class VersionError : public Error {
 public:
  using Error::Error;
};

}  // namespace tacgraph
