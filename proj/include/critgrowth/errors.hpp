#pragma once

#include <stdexcept>
#include <string>

namespace critgrowth {

/// Base of every error raised by the library. `exit_code()` is the CLI mapping:
/// 1 for configuration/domain problems, 2 for computational failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept = 0;
  virtual int exit_code() const noexcept = 0;
};

/// Malformed or inconsistent configuration. `path` names the offending key
/// (e.g. "model.offspring[1]") when known.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }
  const char* kind() const noexcept override { return "config"; }
  int exit_code() const noexcept override { return 1; }

 private:
  std::string path_;
};

/// Value outside the mathematical domain of an operation (negative entries,
/// invalid PMF, zero denominator, ...).
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
  int exit_code() const noexcept override { return 1; }
};

/// Caller violated an operation's precondition (non-primitive matrix passed to
/// perron, non-critical matrix passed to contraction_factor, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "precondition"; }
  int exit_code() const noexcept override { return 1; }
};

class ComputationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "computation"; }
  int exit_code() const noexcept override { return 2; }
};

/// sigma^2 vanished where the growth ratio needs to divide by it.
class DegenerateVarianceError : public ComputationError {
 public:
  using ComputationError::ComputationError;
  const char* kind() const noexcept override { return "degenerate_variance"; }
};

/// A population coordinate would exceed 2^63 - 1.
class PopulationOverflow : public ComputationError {
 public:
  using ComputationError::ComputationError;
  const char* kind() const noexcept override { return "overflow"; }
};

}  // namespace critgrowth
