#pragma once

#include <stdexcept>
#include <string>

namespace vcrit {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration (geometry that does not fit, unknown keys, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An argument outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A weight or scale evaluated outside its positivity domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: instability, non-convergence, non-finite data.
class NumericError : public Error {
 public:
  using Error::Error;
};

class InstabilityError : public NumericError {
 public:
  InstabilityError(const std::string& what, double dt) : NumericError(what), dt_(dt) {}
  double step_size() const noexcept { return dt_; }

 private:
  double dt_;
};

class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& what, double residual)
      : NumericError(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace vcrit
