#pragma once

#include <stdexcept>
#include <string>

namespace frontlab {

// Base of every error the library throws. The CLI maps kinds to exit codes:
// validation-type errors exit 1, solver failures exit 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Operation not defined for the given input kind (e.g. mgf of a Local kernel).
class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

// Inconsistent or out-of-range configuration (CFL, grid resolution, brackets).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Caller violated an operation precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A structural assumption on the family / bracket does not hold.
class AssumptionViolation : public Error {
 public:
  using Error::Error;
};

class NoRealRoot : public Error {
 public:
  using Error::Error;
};

// Iterative solver failed to converge or stagnated.
class NonconvergenceError : public Error {
 public:
  using Error::Error;
};

// Solver hit a resource cap before reaching a verdict.
class InconclusiveError : public NonconvergenceError {
 public:
  using NonconvergenceError::NonconvergenceError;
};

// Explicit time stepping left the invariant region.
class InstabilityError : public NonconvergenceError {
 public:
  InstabilityError(const std::string& what, double time)
      : NonconvergenceError(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

// Converged profile violates monotonicity or positivity.
class InadmissibleProfile : public NonconvergenceError {
 public:
  using NonconvergenceError::NonconvergenceError;
};

class FrontAbsent : public Error {
 public:
  using Error::Error;
};

// Too few samples for a regression window.
class WindowError : public Error {
 public:
  using Error::Error;
};

// Decay fit matched none of the candidate rates.
class Unclassified : public Error {
 public:
  using Error::Error;
};

}  // namespace frontlab
