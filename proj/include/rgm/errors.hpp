#pragma once

#include <stdexcept>
#include <string>

namespace rgm {

/// Base for every error the library raises. `exit_code()` is the CLI status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
  virtual const char* kind() const noexcept { return "error"; }
};

/// Invalid argument or configuration value.
class ParameterError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
  const char* kind() const noexcept override { return "parameter"; }
};

/// K-schedule cannot be built (non-increasing K, K/divisor < 1, reference-only mode).
class ScheduleError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
  const char* kind() const noexcept override { return "schedule"; }
};

/// Solver non-convergence, non-finite values, broken invariants.
class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
  const char* kind() const noexcept override { return "numerical"; }
};

/// Eigenvalue-window condition cannot be met (intersection too small,
/// resample cap exhausted).
class SpectralError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
  const char* kind() const noexcept override { return "spectral"; }
};

}  // namespace rgm
