#pragma once

#include <stdexcept>
#include <string>

namespace qps {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A quantity that must be strictly positive (variance, mass, hbar, ...) is not.
class NonPositive : public Error {
 public:
  using Error::Error;
};

/// Requested covariance matrix lies below the minimum-uncertainty bound.
class UncertaintyViolation : public Error {
 public:
  using Error::Error;
};

/// 2x2 inverse requested for a matrix with non-positive determinant.
class SingularMatrix : public Error {
 public:
  using Error::Error;
};

/// A Markovian-regime operation was invoked with a nonzero covariance rate.
class RegimeMismatch : public Error {
 public:
  using Error::Error;
};

/// Overlap quadrature failed its resolution-doubling convergence check.
class GridTooCoarse : public Error {
 public:
  using Error::Error;
};

/// Negative time argument where only t >= 0 is meaningful.
class NegativeTime : public Error {
 public:
  using Error::Error;
};

/// Negative lag argument to a memory kernel.
class NegativeLag : public Error {
 public:
  using Error::Error;
};

/// Friction coefficient is zero or negative; the covariance identification
/// divides by it.
class FrictionNonpositive : public Error {
 public:
  using Error::Error;
};

/// Cumulative quadrature did not pass its step-halving gate within the
/// refinement budget.
class QuadratureNotConverged : public Error {
 public:
  using Error::Error;
};

/// Every sample of a ratio trajectory fell below the friction threshold.
class AllMasked : public Error {
 public:
  using Error::Error;
};

/// A decay threshold was never crossed on the search horizon.
class NotReached : public Error {
 public:
  using Error::Error;
};

/// Environment overlap matrix violates its structural invariants
/// (unit diagonal, Hermiticity, positive semidefiniteness).
class InvalidOverlap : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration document (not syntactically valid JSON).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Structurally valid configuration with missing, unknown or invalid keys.
/// Messages name the offending key path.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace qps
