#pragma once

#include <stdexcept>
#include <string>

namespace gvs {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent sizes between q, bases, tension vectors, etc.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A specification violates a documented invariant (negative length, bad
// Poisson ratio, unordered bounds, ...).
class InvalidSpec : public Error {
 public:
  using Error::Error;
};

// Numerical solver failure. `residual` is the last residual norm when it is
// meaningful, `time` the simulation time for integrator failures (NaN if not).
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual = -1.0, double time = -1.0)
      : Error(what), residual_(residual), time_(time) {}

  double residual() const { return residual_; }
  double time() const { return time_; }

 private:
  double residual_;
  double time_;
};

// The configuration reached a degenerate geometry (coincident cable points,
// zero-length tangents). Solvers treat it as a rejected trial point.
class GeometryError : public Error {
 public:
  using Error::Error;
};

// File could not be read/written or has malformed content.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gvs
