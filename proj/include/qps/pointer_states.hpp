#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "qps/errors.hpp"
#include "qps/phase_space.hpp"
#include "qps/quadrature.hpp"
#include "qps/time_series.hpp"

namespace qps {

/// Minimum-uncertainty Gaussian state labeled by its phase-space point.
/// The covariance matrix must be saturated; that is what makes these the
/// closest quantum analogues of classical phase-space points.
struct PointerState {
  PhasePoint point;
  CovarianceMatrix G;
};

/// Validating constructor for PointerState.
inline PointerState make_pointer_state(PhasePoint z, const CovarianceMatrix& g) {
  if (!g.saturated)
    throw UncertaintyViolation("pointer states require a saturated covariance matrix");
  if (!std::isfinite(z.p) || !std::isfinite(z.x))
    throw ValidationError("phase-space point must be finite");
  return {z, g};
}

/// Coordinate wavefunction of a pointer state:
/// psi(x) = (2 pi X)^{-1/4} exp(-B (x - <x>)^2 / hbar^2 + i <p> x / hbar)
/// with B the complex width parameter of the state's covariance matrix.
inline std::complex<double> wavefunction(const PointerState& s, double x) {
  const double X = s.G.X;
  const double hb = s.G.hbar;
  const std::complex<double> B = b_parameter(s.G);
  const double dx = x - s.point.x;
  const std::complex<double> exponent =
      -B * (dx * dx) / (hb * hb) + std::complex<double>(0.0, s.point.p * x / hb);
  return std::pow(2.0 * M_PI * X, -0.25) * std::exp(exponent);
}

/// Overlap <z1|z2> of two pointer states sharing one covariance matrix,
/// in closed form:
///   exp(-(1/8) y^T G^{-1} y + i (x1 + x2)(p2 - p1) / (2 hbar)),
/// y = (p2 - p1, x2 - x1).
/// The Gaussian normalization cancels exactly, so the modulus is
/// exp(-(1/8) y^T G^{-1} y) <= 1 with equality iff z1 = z2.
inline std::complex<double> overlap_same_covariance(PhasePoint z1, PhasePoint z2,
                                                    const CovarianceMatrix& g) {
  const SymMat2 gi = invert(g);
  const Vec2 y{z2.p - z1.p, z2.x - z1.x};
  const double quad = gi.quad(y);
  const double phase = (z1.x + z2.x) * (z2.p - z1.p) / (2.0 * g.hbar);
  return std::exp(std::complex<double>(-0.125 * quad, phase));
}

/// Numerical overlap integral of two pointer-state wavefunctions. This is
/// the independent check of the closed forms above: composite trapezoid over
/// the union of both centers +- 12 standard deviations, panel count doubled
/// until successive results differ by less than tol.
///
/// Throws GridTooCoarse when the doubling check cannot get the shift below
/// coarse_limit within the refinement budget.
inline std::complex<double> overlap_oracle(const PointerState& s1, const PointerState& s2,
                                           double tol = 1e-8, double coarse_limit = 1e-7) {
  if (s1.G.hbar != s2.G.hbar)
    throw ValidationError("overlap_oracle requires both states to share hbar");
  const double sigma = std::max(std::sqrt(s1.G.X), std::sqrt(s2.G.X));
  const double lo = std::min(s1.point.x, s2.point.x) - 12.0 * sigma;
  const double hi = std::max(s1.point.x, s2.point.x) + 12.0 * sigma;
  auto integrand = [&](double x) { return std::conj(wavefunction(s1, x)) * wavefunction(s2, x); };
  const QuadratureResult r = integrate_doubling(integrand, lo, hi, tol);
  if (!r.converged && r.last_delta > coarse_limit)
    throw GridTooCoarse("overlap quadrature shifted by " + std::to_string(r.last_delta) +
                        " at the final doubling");
  return r.value;
}

/// Pointer-basis matrix element of the pure analogous state centered at z0:
/// rho(z, z') = <z|z0><z0|z'>.
struct DensityElement {
  std::complex<double> value{};
  PhasePoint z;
  PhasePoint z_prime;
  double t = 0.0;
};

inline DensityElement rho_element(PhasePoint z, PhasePoint z_prime, PhasePoint z0,
                                  const CovarianceMatrix& g, double t = 0.0) {
  if (!g.saturated)
    throw UncertaintyViolation("rho_element requires a saturated covariance matrix");
  const std::complex<double> value =
      overlap_same_covariance(z, z0, g) * overlap_same_covariance(z0, z_prime, g);
  return {value, z, z_prime, t};
}

/// Phase-space trajectory of the moving center state: callables for the
/// expectation values and their time derivatives, plus a reference period
/// used to scale finite-difference steps and regime checks.
class Trajectory {
 public:
  using Fn = std::function<double(double)>;

  Trajectory(Fn momentum, Fn position, Fn momentum_rate, Fn position_rate, double period)
      : p_(std::move(momentum)),
        x_(std::move(position)),
        pdot_(std::move(momentum_rate)),
        xdot_(std::move(position_rate)),
        period_(period) {
    if (!(period_ > 0.0)) throw ValidationError("trajectory period must be > 0");
  }

  /// Harmonic motion x0(t) = A cos(w t), p0(t) = -m A w sin(w t).
  static Trajectory harmonic(double amplitude = 1.0, double omega = 1.0, double mass = 1.0) {
    if (!(omega > 0.0)) throw NonPositive("harmonic trajectory needs omega > 0");
    return Trajectory(
        [=](double t) { return -mass * amplitude * omega * std::sin(omega * t); },
        [=](double t) { return amplitude * std::cos(omega * t); },
        [=](double t) { return -mass * amplitude * omega * omega * std::cos(omega * t); },
        [=](double t) { return -amplitude * omega * std::sin(omega * t); }, 2.0 * M_PI / omega);
  }

  /// Motionless center with zero rates.
  static Trajectory stationary(PhasePoint at = {}, double period = 1.0) {
    return Trajectory([=](double) { return at.p; }, [=](double) { return at.x; },
                      [](double) { return 0.0; }, [](double) { return 0.0; }, period);
  }

  /// Trajectory from uniformly sampled momentum/position series. Values are
  /// interpolated linearly; rates come from central differences on the grid
  /// (one-sided at the endpoints).
  static Trajectory sampled(const TimeGrid& grid, std::vector<double> momentum,
                            std::vector<double> position) {
    grid.validate();
    if (momentum.size() != grid.n || position.size() != grid.n)
      throw ValidationError("sampled trajectory series must match the grid length");
    auto pdot = finite_difference(momentum, grid.dt());
    auto xdot = finite_difference(position, grid.dt());
    auto interp = [grid](std::vector<double> v) {
      return [grid, v = std::move(v)](double t) {
        const double s = t / grid.dt();
        if (s <= 0.0) return v.front();
        if (s >= static_cast<double>(v.size() - 1)) return v.back();
        const auto i = static_cast<std::size_t>(s);
        const double w = s - static_cast<double>(i);
        return v[i] * (1.0 - w) + v[i + 1] * w;
      };
    };
    return Trajectory(interp(std::move(momentum)), interp(std::move(position)),
                      interp(std::move(pdot)), interp(std::move(xdot)), grid.t_end);
  }

  PhasePoint point_at(double t) const { return {p_(t), x_(t)}; }
  Vec2 velocity_at(double t) const { return {pdot_(t), xdot_(t)}; }
  double period() const { return period_; }

  /// Checks the supplied rates against central differences of the sampled
  /// values; returns the worst relative deviation over the grid.
  double derivative_consistency(const TimeGrid& grid) const {
    std::vector<double> p(grid.n), x(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
      p[i] = p_(grid.t(i));
      x[i] = x_(grid.t(i));
    }
    const auto pd = finite_difference(p, grid.dt());
    const auto xd = finite_difference(x, grid.dt());
    double scale = 1e-12;
    for (std::size_t i = 0; i < grid.n; ++i)
      scale = std::max({scale, std::abs(pd[i]), std::abs(xd[i])});
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < grid.n; ++i) {
      const Vec2 v = velocity_at(grid.t(i));
      worst = std::max({worst, std::abs(v.p - pd[i]) / scale, std::abs(v.x - xd[i]) / scale});
    }
    return worst;
  }

 private:
  Fn p_, x_, pdot_, xdot_;
  double period_;
};

/// Analytic time derivative of rho_element along a trajectory, returned as
/// the full complex rate (Phi + i Theta) * rho.
///
/// Phi and Theta are real. In the Markovian regime (static covariance)
///   Phi = -(1/4) u0 . G^{-1} (y0 + y0'),
/// and in the non-Markovian regime the quadratic correction
///   -(1/8) [y0 . dGinv y0 + y0' . dGinv y0']  with  dGinv = -G^{-1} Gdot G^{-1}
/// is added. In both regimes
///   Theta = (1/2 hbar) [pdot0 (x - x') - xdot0 (p - p')],
/// where y0 = z0 - z, y0' = z0 - z', u0 = (pdot0, xdot0).
///
/// Throws RegimeMismatch when the Markovian regime is requested with a
/// covariance rate that is not negligible against the trajectory timescale.
inline std::complex<double> rho_time_derivative(PhasePoint z, PhasePoint z_prime,
                                                const Trajectory& traj,
                                                const CovarianceMatrix& g,
                                                const CovarianceRate& gdot, double t,
                                                Regime regime) {
  const PhasePoint z0 = traj.point_at(t);
  const Vec2 u0 = traj.velocity_at(t);
  const SymMat2 gi = invert(g);
  const Vec2 y0{z0.p - z.p, z0.x - z.x};
  const Vec2 y0p{z0.p - z_prime.p, z0.x - z_prime.x};

  const Vec2 giv = gi.apply(y0 + y0p);
  double phi = -0.25 * (u0.p * giv.p + u0.x * giv.x);
  if (regime == Regime::Markovian) {
    if (classify_regime(gdot, g, 1e-9) != Regime::Markovian)
      throw RegimeMismatch("Markovian derivative requested with nonzero covariance rate");
  } else {
    const SymMat2 gid = inverse_rate(g, gdot);
    phi += -0.125 * (gid.quad(y0) + gid.quad(y0p));
  }
  const double theta =
      (u0.p * (z.x - z_prime.x) - u0.x * (z.p - z_prime.p)) / (2.0 * g.hbar);

  return std::complex<double>(phi, theta) * rho_element(z, z_prime, z0, g, t).value;
}

}  // namespace qps
