#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kpvote {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Mismatched container sizes or tensor dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Argument outside its documented domain (non-finite, empty, bad tag, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Matrix with non-finite entries fed to a linear-algebra routine.
class InvalidMatrix : public Error {
 public:
  using Error::Error;
};

/// Object model that cannot be evaluated (no points).
class InvalidModel : public Error {
 public:
  using Error::Error;
};

/// Scalar input outside the mathematical domain of a loss term.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Problem instance with no usable votes (all weights zero, no candidates).
/// Carries the keypoint index when the failure is per-keypoint.
class DegenerateProblem : public Error {
 public:
  explicit DegenerateProblem(const std::string& what,
                             std::ptrdiff_t keypoint_index = -1)
      : Error(what), keypoint_index_(keypoint_index) {}

  /// Index of the offending keypoint, or -1 when the whole problem is bad.
  std::ptrdiff_t keypoint_index() const { return keypoint_index_; }

 private:
  std::ptrdiff_t keypoint_index_;
};

/// Correspondence geometry that does not determine a rotation.
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

/// Fewer correspondences than the three required for a unique rotation.
class TooFewCorrespondences : public Error {
 public:
  using Error::Error;
};

/// Scene generation produced an unusable scene (e.g. occlusion removed
/// every point).
class DegenerateScene : public Error {
 public:
  using Error::Error;
};

/// Malformed experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kpvote
