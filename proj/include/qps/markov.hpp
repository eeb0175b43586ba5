#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "qps/constants.hpp"
#include "qps/errors.hpp"
#include "qps/phase_space.hpp"
#include "qps/pointer_states.hpp"

namespace qps {

/// One dissipation channel V = a p + b x with complex couplings.
struct LindbladChannel {
  std::complex<double> a{};  ///< momentum weight
  std::complex<double> b{};  ///< position weight
};

/// Diffusion coefficients and friction extracted from a channel set.
/// Invariant: D_pp * D_xx - D_px^2 >= (hbar^2/4) Lambda^2, with equality for
/// a single channel.
struct DiffusionSet {
  double D_pp = 0.0;
  double D_xx = 0.0;
  double D_px = 0.0;
  double Lambda = 0.0;
};

/// Coefficients of the general quadratic Hamiltonian
/// H = A_pp p^2 + A_xx x^2 + A_px (xp + px) + A_p p + A_x x + A.
struct QuadraticHamiltonian {
  double A_pp = 0.0;
  double A_xx = 0.0;
  double A_px = 0.0;
  double A_p = 0.0;
  double A_x = 0.0;
  double A = 0.0;  // scalar offset, physically irrelevant; fixed to 0
};

/// Diffusion/friction coefficients of a channel set:
///   D_xx = (hbar/2) sum |a_j|^2        D_pp = (hbar/2) sum |b_j|^2
///   D_px = -(hbar/2) sum Re(a_j* b_j)  Lambda = -sum Im(a_j* b_j)
/// The channel count is capped at 2 unless allow_many_channels is set; the
/// sums extend term by term either way.
inline DiffusionSet channel_coefficients(std::span<const LindbladChannel> channels, double hbar,
                                         bool allow_many_channels = false) {
  if (!(hbar > 0.0)) throw NonPositive("hbar must be > 0");
  if (channels.empty()) throw ValidationError("channel list must be nonempty");
  if (!allow_many_channels && channels.size() > 2)
    throw ValidationError("more than 2 channels requires allow_many_channels");
  DiffusionSet d;
  for (const auto& ch : channels) {
    if (ch.a == std::complex<double>{} && ch.b == std::complex<double>{})
      throw ValidationError("channel couplings (a, b) must not both be zero");
    const std::complex<double> ab = std::conj(ch.a) * ch.b;
    d.D_xx += 0.5 * hbar * std::norm(ch.a);
    d.D_pp += 0.5 * hbar * std::norm(ch.b);
    d.D_px += -0.5 * hbar * ab.real();
    d.Lambda += -ab.imag();
  }
  return d;
}

/// Covariance matrix selected by a stationary environment:
/// P = D_pp / Lambda, X = D_xx / Lambda, Q = D_px / Lambda.
/// A single channel always lands exactly on the uncertainty bound
/// (|a|^2 |b|^2 = Re^2 + Im^2); multi-channel sets land on or above it, and
/// come back with saturated = false when strictly above.
inline CovarianceMatrix identify_qps(const DiffusionSet& d, double hbar) {
  if (!(d.Lambda > 0.0))
    throw FrictionNonpositive("covariance identification requires friction Lambda > 0");
  return make_covariance(d.D_pp / d.Lambda, d.D_xx / d.Lambda, d.D_px / d.Lambda, hbar);
}

/// Quadratic Hamiltonian consistent with a given covariance structure and
/// center trajectory at time t:
/// A_pp = 1/(2m), A_xx = P/(2mX), A_px = -Q/(2mX), A_p = -pdot0, A_x = xdot0.
inline QuadraticHamiltonian hamiltonian_coefficients(const CovarianceMatrix& g,
                                                     const PhysicalConstants& consts,
                                                     const Trajectory& traj, double t) {
  consts.validate();
  const Vec2 u0 = traj.velocity_at(t);
  QuadraticHamiltonian h;
  h.A_pp = 1.0 / (2.0 * consts.mass);
  h.A_xx = g.P / (2.0 * consts.mass * g.X);
  h.A_px = -g.Q / (2.0 * consts.mass * g.X);
  h.A_p = -u0.p;
  h.A_x = u0.x;
  h.A = 0.0;
  return h;
}

/// Constant decoherence rate of the high-temperature memoryless regime:
/// Gamma = 2 m gamma k_B T / hbar^2.
inline double gamma_markov(const PhysicalConstants& consts, double gamma_friction) {
  consts.validate();
  if (!(gamma_friction > 0.0)) throw NonPositive("friction rate gamma must be > 0");
  if (!(consts.boltzmann_kT > 0.0)) throw NonPositive("gamma_markov needs boltzmann_kT > 0");
  return 2.0 * consts.mass * gamma_friction * consts.boltzmann_kT / (consts.hbar * consts.hbar);
}

/// Exponential suppression of a spatial-superposition matrix element:
/// rho0 * exp(-Gamma t dx^2). The modulus never increases with t.
inline std::complex<double> coherence_decay(std::complex<double> rho0, double dx, double gamma_rate,
                                            double t) {
  if (t < 0.0) throw NegativeTime("coherence_decay requires t >= 0");
  return rho0 * std::exp(-gamma_rate * t * dx * dx);
}

}  // namespace qps
