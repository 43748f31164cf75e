#pragma once

#include <stdexcept>
#include <string>

namespace lowrank {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Incompatible matrix shapes.
struct DimensionError : Error {
  using Error::Error;
};

/// An argument violated a documented precondition.
struct ValidationError : Error {
  using Error::Error;
};

/// The input lies outside the domain of the requested construction.
struct DomainError : Error {
  using Error::Error;
};

/// A configured resource cap (memory, enumeration size) would be exceeded.
struct ResourceError : Error {
  using Error::Error;
};

/// An iterative method exhausted its budget; carries the best estimate.
struct ConvergenceError : Error {
  ConvergenceError(const std::string& what, double best)
      : Error(what), best_estimate(best) {}
  double best_estimate;
};

/// A randomized hypothesis sampler failed to produce a valid instance.
struct SamplerError : Error {
  using Error::Error;
};

}  // namespace lowrank
