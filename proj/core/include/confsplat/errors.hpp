#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace confsplat {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or out-of-domain input parameter.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Raster or array shapes that must agree do not.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Too few valid samples to determine the unknowns.
class InsufficientConstraints : public Error {
 public:
  using Error::Error;
};

/// An iterative solver produced a non-finite objective.
class Divergence : public Error {
 public:
  Divergence(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// A map that needs at least one valid pixel has none.
class EmptyMap : public Error {
 public:
  using Error::Error;
};

/// A metric is undefined for the given input (e.g. empty point cloud).
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

/// File or format error.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unknown configuration entry.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Training aborted (non-finite loss, all Gaussians pruned).
class TrainingAborted : public Error {
 public:
  TrainingAborted(const std::string& what, std::size_t iteration)
      : Error(what + " at iteration " + std::to_string(iteration)), iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace confsplat
