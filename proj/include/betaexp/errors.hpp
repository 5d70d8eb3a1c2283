#pragma once

#include <stdexcept>
#include <string>

namespace betaexp {

/// Precondition violated by the caller (bad n, q, x outside [0,1), ...).
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Division by an algebraic number that evaluates to zero at beta.
class zero_division_error : public domain_error {
 public:
  using domain_error::domain_error;
};

/// Operands built over different contexts or in incompatible modes.
class mode_mismatch_error : public domain_error {
 public:
  using domain_error::domain_error;
};

/// A configured cap (leaf count, piece count, lag budget) was exceeded.
class resource_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative refinement did not converge within its budget.
class convergence_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace betaexp
