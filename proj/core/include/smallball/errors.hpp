#pragma once

#include <stdexcept>
#include <string>

namespace sblab {

/// Malformed or mismatched inputs (non-finite entries, dimension mismatch, bad files).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A scalar parameter outside its admissible range (q < 1, k > m, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The input is well formed but the quantity is undefined on it (zero operator, zero vector).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A checked mathematical precondition does not hold.
class PreconditionError : public std::domain_error {
 public:
  PreconditionError(const std::string& what, double measured)
      : std::domain_error(what), measured_(measured) {}
  explicit PreconditionError(const std::string& what)
      : PreconditionError(what, 0.0) {}

  double measured() const noexcept { return measured_; }

 private:
  double measured_;
};

/// Experiment configuration problems (unknown keys, wrong types, bad enum values).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sblab
