#pragma once

#include <stdexcept>
#include <string>

namespace infostab {

// A probability or chain parameter outside its admissible range.
class ParameterError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A configuration that is well-formed numerically but violates a modelling
// assumption (server ordering, malformed JSON document, missing fields).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Division by a zero observation probability, or a belief operator without
// the fixed-point structure that was asked for.
class DegenerateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Caller broke an API contract: observation payload does not match the
// scheme, policy cannot run under the scheme, matrix sizes disagree.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Refusing work whose cost grows beyond a fixed guard.
class ResourceError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual, long iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  long iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  long iterations_;
};

}  // namespace infostab
