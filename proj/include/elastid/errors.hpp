#pragma once

#include <stdexcept>
#include <string>

namespace elastid {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: unknown material, malformed config, inconsistent shapes.
struct ConfigError : Error {
  using Error::Error;
};

// Inadmissible kinematic state (det F <= 0, invalid invariant pair, ...).
struct KinematicsError : Error {
  using Error::Error;
};

// Linear-algebra/sampling breakdown: failed Cholesky, non-finite state.
struct NumericalError : Error {
  using Error::Error;
};

// Newton divergence or explicit-integration blow-up.
struct SolverError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace elastid
