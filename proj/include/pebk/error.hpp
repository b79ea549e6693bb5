#pragma once

#include <stdexcept>
#include <string>

namespace pebk {

/// Raised for malformed inputs: dimension mismatches, invalid parameters,
/// broken structural invariants.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure cannot deliver its contract
/// (singular pivot, Krylov budget exhausted, divergence).
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Krylov budget exhausted before the residual target was met.
class KrylovBudgetExceeded : public SolverError {
public:
  KrylovBudgetExceeded(const std::string& what, double best_residual)
      : SolverError(what), best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

private:
  double best_residual_;
};

/// Singular pivot met while factoring a shifted operator.
class SingularPivot : public SolverError {
public:
  SingularPivot(const std::string& what, long pivot)
      : SolverError(what), pivot_(pivot) {}

  long pivot() const noexcept { return pivot_; }

private:
  long pivot_;
};

}  // namespace pebk
