#pragma once

#include <stdexcept>
#include <string>

namespace canonpose {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A pose was handed to an operation expecting a different frame or space tag.
class InvalidFrameError : public Error {
 public:
  using Error::Error;
};

/// A joint sits at or behind the camera plane (Z <= kDepthEpsilon).
class BehindCameraError : public Error {
 public:
  using Error::Error;
};

/// Input vector too short to define a direction.
class DegenerateVectorError : public Error {
 public:
  using Error::Error;
};

/// Alignment of two opposite directions; Rodrigues' axis is undefined.
class AntiparallelError : public Error {
 public:
  using Error::Error;
};

/// Homogeneous coordinate with |w| <= kDepthEpsilon after a 2D transform.
class DegenerateHomogeneousError : public Error {
 public:
  using Error::Error;
};

/// Shape or joint-count mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Joint configuration of rank < 2 (coincident or collinear joints).
class DegenerateShapeError : public Error {
 public:
  using Error::Error;
};

/// Normal matrix of a least-squares fit is not invertible.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// Value violates a documented type invariant (bad intrinsics, empty pose, ...).
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Malformed input record; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed record that disagrees with the file's schema (joint counts, skeleton).
class SchemaError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace canonpose
