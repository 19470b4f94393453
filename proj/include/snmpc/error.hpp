#pragma once

#include <stdexcept>
#include <string>

namespace snmpc {

/// Base of every error raised by the library. The CLI maps the two
/// families below onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: parameters, configuration files, mismatched grids.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine could not produce a trustworthy result.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ModelDomainError : public NumericError {
 public:
  using NumericError::NumericError;
};

class LinearizationError : public NumericError {
 public:
  using NumericError::NumericError;
};

class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, double time)
      : NumericError(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

class StepSizeError : public NumericError {
 public:
  using NumericError::NumericError;
};

class MetricError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class CertificateError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace snmpc
