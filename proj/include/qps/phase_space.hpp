#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

#include "qps/errors.hpp"

namespace qps {

/// Relative half-width of the band around hbar^2/4 inside which a
/// determinant counts as saturated. Construction admits anything above the
/// lower edge of this band.
inline constexpr double kSaturationRelTol = 1e-10;

/// Phase-space point: expectation values of momentum and position.
struct PhasePoint {
  double p = 0.0;
  double x = 0.0;
};

/// Pair of momentum/position components, used for phase-space differences
/// and rates.
struct Vec2 {
  double p = 0.0;
  double x = 0.0;

  Vec2 operator+(Vec2 o) const { return {p + o.p, x + o.x}; }
  Vec2 operator-(Vec2 o) const { return {p - o.p, x - o.x}; }
};

/// Symmetric 2x2 matrix in the (momentum, position) ordering.
struct SymMat2 {
  double pp = 0.0;  ///< momentum-momentum entry
  double px = 0.0;  ///< off-diagonal entry
  double xx = 0.0;  ///< position-position entry

  double det() const { return pp * xx - px * px; }

  Vec2 apply(Vec2 v) const { return {pp * v.p + px * v.x, px * v.p + xx * v.x}; }

  /// Quadratic form v . (M v).
  double quad(Vec2 v) const {
    const Vec2 mv = apply(v);
    return v.p * mv.p + v.x * mv.x;
  }
};

/// Inverse of a symmetric 2x2 matrix. Throws SingularMatrix for det <= 0.
inline SymMat2 invert(const SymMat2& m) {
  const double d = m.det();
  if (!(d > 0.0)) throw SingularMatrix("2x2 matrix has non-positive determinant");
  return {m.xx / d, -m.px / d, m.pp / d};
}

/// Momentum/position variance-covariance matrix [[P, Q], [Q, X]].
///
/// P and X are the momentum and position variances, Q the covariance.
/// Admissible matrices satisfy P*X - Q^2 >= hbar^2/4; the saturated flag
/// marks matrices sitting on that bound (minimum-uncertainty states).
/// Construct through make_covariance or saturated_from_XQ; instances are
/// treated as immutable values.
struct CovarianceMatrix {
  double P = 0.0;
  double X = 0.0;
  double Q = 0.0;
  double hbar = 1.0;
  double det = 0.0;
  bool saturated = false;

  SymMat2 matrix() const { return {P, Q, X}; }
};

/// Time derivative of a covariance matrix, with the reference timescale the
/// caller wants rates judged against.
struct CovarianceRate {
  double Pdot = 0.0;
  double Xdot = 0.0;
  double Qdot = 0.0;
  /// Timescale used to nondimensionalize the rates (e.g. a trajectory
  /// period or the sampling window).
  double timescale = 1.0;

  SymMat2 matrix() const { return {Pdot, Qdot, Xdot}; }
};

enum class Regime { Markovian, NonMarkovian };

/// Builds an admissible covariance matrix, validating positivity and the
/// uncertainty bound. The saturated flag is set when det lies within
/// kSaturationRelTol (relative) of hbar^2/4.
inline CovarianceMatrix make_covariance(double P, double X, double Q, double hbar = 1.0) {
  if (!(hbar > 0.0)) throw NonPositive("hbar must be > 0");
  if (!(P > 0.0)) throw NonPositive("momentum variance P must be > 0");
  if (!(X > 0.0)) throw NonPositive("position variance X must be > 0");
  const double det = P * X - Q * Q;
  const double bound = hbar * hbar / 4.0;
  if (det < bound * (1.0 - kSaturationRelTol))
    throw UncertaintyViolation("P*X - Q^2 = " + std::to_string(det) +
                               " below the minimum-uncertainty bound " + std::to_string(bound));
  CovarianceMatrix g;
  g.P = P;
  g.X = X;
  g.Q = Q;
  g.hbar = hbar;
  g.det = det;
  g.saturated = std::abs(det - bound) <= kSaturationRelTol * bound;
  return g;
}

/// Saturated covariance matrix from position variance and covariance alone;
/// the momentum variance is forced onto the uncertainty bound,
/// P = (hbar^2/4 + Q^2) / X.
inline CovarianceMatrix saturated_from_XQ(double X, double Q, double hbar = 1.0) {
  if (!(hbar > 0.0)) throw NonPositive("hbar must be > 0");
  if (!(X > 0.0)) throw NonPositive("position variance X must be > 0");
  const double P = (hbar * hbar / 4.0 + Q * Q) / X;
  CovarianceMatrix g = make_covariance(P, X, Q, hbar);
  g.saturated = true;
  return g;
}

/// Complex width parameter of the minimum-uncertainty wavefunction,
/// B = hbar^2/(4X) * (1 - 2iQ/hbar). Re(B) > 0 for every admissible matrix.
inline std::complex<double> b_parameter(const CovarianceMatrix& g) {
  const double re = g.hbar * g.hbar / (4.0 * g.X);
  return re * std::complex<double>(1.0, -2.0 * g.Q / g.hbar);
}

/// Inverse covariance matrix (1/det) [[X, -Q], [-Q, P]]. For saturated
/// matrices the prefactor equals 4/hbar^2.
inline SymMat2 invert(const CovarianceMatrix& g) {
  if (!(g.det > 0.0)) throw SingularMatrix("covariance matrix has non-positive determinant");
  return {g.X / g.det, -g.Q / g.det, g.P / g.det};
}

/// d/dt of the inverse covariance matrix: -G^{-1} Gdot G^{-1}.
inline SymMat2 inverse_rate(const CovarianceMatrix& g, const CovarianceRate& rate) {
  const SymMat2 gi = invert(g);
  const SymMat2 gd = rate.matrix();
  // full 2x2 product gi * gd * gi; the result is symmetric
  const double a = gi.pp * gd.pp + gi.px * gd.px;  // (gi*gd)_pp
  const double b = gi.pp * gd.px + gi.px * gd.xx;  // (gi*gd)_px
  const double c = gi.px * gd.pp + gi.xx * gd.px;  // (gi*gd)_xp
  const double d = gi.px * gd.px + gi.xx * gd.xx;  // (gi*gd)_xx
  return {-(a * gi.pp + b * gi.px), -(a * gi.px + b * gi.xx), -(c * gi.px + d * gi.xx)};
}

/// Classifies the environment regime from the covariance time-dependence:
/// Markovian iff all nondimensionalized rates
/// max(|Pdot| T / P, |Xdot| T / X, |Qdot| T / sqrt(P X)) stay within tol,
/// where T is the rate's reference timescale.
inline Regime classify_regime(const CovarianceRate& rate, const CovarianceMatrix& scale,
                              double tol) {
  if (!(tol > 0.0)) throw ValidationError("classify_regime tolerance must be > 0");
  const double T = rate.timescale;
  const double m = std::max({std::abs(rate.Pdot) * T / scale.P, std::abs(rate.Xdot) * T / scale.X,
                             std::abs(rate.Qdot) * T / std::sqrt(scale.P * scale.X)});
  return m <= tol ? Regime::Markovian : Regime::NonMarkovian;
}

}  // namespace qps
