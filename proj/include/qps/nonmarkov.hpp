#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "qps/errors.hpp"
#include "qps/kernels.hpp"
#include "qps/markov.hpp"
#include "qps/phase_space.hpp"
#include "qps/quadrature.hpp"
#include "qps/time_series.hpp"

namespace qps {

/// One memory-bearing environment channel: couplings, its noise kernel C,
/// dissipation kernel D, and the mode frequency entering the cos/sin
/// weights of the coefficient integrals. omega is a user parameter; 0
/// recovers plain kernel integrals (and a vanishing friction series, since
/// the friction integrand carries sin(omega tau)).
struct ChannelSpec {
  LindbladChannel channel;
  MemoryKernel noise;        // C_j
  MemoryKernel dissipation;  // D_j
  double omega = 0.0;        // omega_j
};

/// Time-dependent diffusion/friction coefficients on a shared grid.
/// All four series start at exactly 0 (integrals from 0).
struct CoefficientSeries {
  TimeGrid grid;
  std::vector<double> D_pp;
  std::vector<double> D_xx;
  std::vector<double> D_px;
  std::vector<double> Lambda;
};

/// Running coefficient integrals
///   D_xx(t)   = (hbar/2) sum_j |a_j|^2      int_0^t C_j(tau) cos(omega_j tau) dtau
///   D_pp(t)   = (hbar/2) sum_j |b_j|^2      int_0^t C_j(tau) cos(omega_j tau) dtau
///   D_px(t)   = -(hbar/2) sum_j Re(a_j*b_j) int_0^t C_j(tau) cos(omega_j tau) dtau
///   Lambda(t) = -sum_j Im(a_j*b_j)          int_0^t D_j(tau) sin(omega_j tau) dtau
/// evaluated by cumulative trapezoid with a step-halving convergence gate
/// (each sample stable to rel_tol). Narrow kernels are resolved by internal
/// refinement; QuadratureNotConverged signals an exhausted budget.
inline CoefficientSeries time_dependent_coefficients(std::span<const ChannelSpec> specs,
                                                     double hbar, const TimeGrid& grid,
                                                     double rel_tol = 1e-6,
                                                     std::size_t max_refine_log2 = 17) {
  if (!(hbar > 0.0)) throw NonPositive("hbar must be > 0");
  if (specs.empty()) throw ValidationError("channel spec list must be nonempty");
  grid.validate(64);

  CoefficientSeries cs;
  cs.grid = grid;
  cs.D_pp.assign(grid.n, 0.0);
  cs.D_xx.assign(grid.n, 0.0);
  cs.D_px.assign(grid.n, 0.0);
  cs.Lambda.assign(grid.n, 0.0);

  for (const auto& spec : specs) {
    if (!std::isfinite(spec.omega)) throw ValidationError("channel omega must be finite");
    const std::complex<double> ab = std::conj(spec.channel.a) * spec.channel.b;
    auto cosine_weighted = [&](double tau) {
      return kernel_eval(spec.noise, tau) * std::cos(spec.omega * tau);
    };
    auto sine_weighted = [&](double tau) {
      return kernel_eval(spec.dissipation, tau) * std::sin(spec.omega * tau);
    };
    const std::vector<double> ic =
        cumulative_trapezoid_refining(cosine_weighted, grid.t_end, grid.n, rel_tol,
                                      max_refine_log2);
    const std::vector<double> is =
        cumulative_trapezoid_refining(sine_weighted, grid.t_end, grid.n, rel_tol,
                                      max_refine_log2);
    const double wa = 0.5 * hbar * std::norm(spec.channel.a);
    const double wb = 0.5 * hbar * std::norm(spec.channel.b);
    const double wre = -0.5 * hbar * ab.real();
    const double wim = -ab.imag();
    for (std::size_t i = 0; i < grid.n; ++i) {
      cs.D_xx[i] += wa * ic[i];
      cs.D_pp[i] += wb * ic[i];
      cs.D_px[i] += wre * ic[i];
      cs.Lambda[i] += wim * is[i];
    }
  }
  return cs;
}

/// Pointwise ratio trajectory P = D_pp/Lambda, X = D_xx/Lambda,
/// Q = D_px/Lambda on the sub-grid where |Lambda| exceeds epsilon_lambda.
/// Samples below the threshold are masked (NaN gap markers), never dropped:
/// the ratios are 0/0 there and carry no information.
struct QPSTrajectory {
  TimeGrid grid;
  double hbar = 1.0;
  std::vector<double> P;
  std::vector<double> X;
  std::vector<double> Q;
  /// (P X - Q^2 - hbar^2/4) / (hbar^2/4) at unmasked samples, NaN elsewhere.
  std::vector<double> det_residual;
  std::vector<bool> masked;
  std::size_t unmasked_count = 0;
};

inline QPSTrajectory qps_trajectory(const CoefficientSeries& cs, double hbar,
                                    double epsilon_lambda = 1e-9) {
  if (!(epsilon_lambda > 0.0)) throw NonPositive("epsilon_lambda must be > 0");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  QPSTrajectory traj;
  traj.grid = cs.grid;
  traj.hbar = hbar;
  traj.P.assign(cs.grid.n, nan);
  traj.X.assign(cs.grid.n, nan);
  traj.Q.assign(cs.grid.n, nan);
  traj.det_residual.assign(cs.grid.n, nan);
  traj.masked.assign(cs.grid.n, true);
  const double bound = hbar * hbar / 4.0;
  for (std::size_t i = 0; i < cs.grid.n; ++i) {
    if (std::abs(cs.Lambda[i]) <= epsilon_lambda) continue;
    traj.P[i] = cs.D_pp[i] / cs.Lambda[i];
    traj.X[i] = cs.D_xx[i] / cs.Lambda[i];
    traj.Q[i] = cs.D_px[i] / cs.Lambda[i];
    traj.det_residual[i] = (traj.P[i] * traj.X[i] - traj.Q[i] * traj.Q[i] - bound) / bound;
    traj.masked[i] = false;
    ++traj.unmasked_count;
  }
  if (traj.unmasked_count == 0)
    throw AllMasked("no grid sample has |Lambda| above epsilon_lambda");
  return traj;
}

/// Result of auditing a trajectory against the minimum-uncertainty bound.
struct SaturationAudit {
  double tol = 0.0;
  double max_abs_residual = 0.0;
  double fraction_within_tol = 0.0;
  bool pass = false;
};

/// Measures how far the trajectory strays from det = hbar^2/4. The bound is
/// an idealization generic kernel pairs do not meet; this reports by how
/// much instead of enforcing it.
inline SaturationAudit saturation_audit(const QPSTrajectory& traj, double hbar, double tol) {
  if (traj.unmasked_count == 0) throw AllMasked("saturation_audit needs unmasked samples");
  const double bound = hbar * hbar / 4.0;
  SaturationAudit audit;
  audit.tol = tol;
  std::size_t within = 0;
  for (std::size_t i = 0; i < traj.grid.n; ++i) {
    if (traj.masked[i]) continue;
    const double r =
        std::abs((traj.P[i] * traj.X[i] - traj.Q[i] * traj.Q[i] - bound) / bound);
    audit.max_abs_residual = std::max(audit.max_abs_residual, r);
    if (r <= tol) ++within;
  }
  audit.fraction_within_tol =
      static_cast<double>(within) / static_cast<double>(traj.unmasked_count);
  audit.pass = audit.max_abs_residual <= tol;
  return audit;
}

/// Rescales every unmasked sample by the unique positive factor restoring
/// det = hbar^2/4, preserving the P:X:Q ratios. Requires det > 0 at every
/// unmasked sample.
inline QPSTrajectory project_to_saturation(const QPSTrajectory& traj, double hbar) {
  QPSTrajectory out = traj;
  const double bound = hbar * hbar / 4.0;
  for (std::size_t i = 0; i < traj.grid.n; ++i) {
    if (traj.masked[i]) continue;
    const double det = traj.P[i] * traj.X[i] - traj.Q[i] * traj.Q[i];
    if (!(det > 0.0))
      throw SingularMatrix("projection requires a positive determinant at every sample");
    const double s = std::sqrt(bound / det);
    out.P[i] = s * traj.P[i];
    out.X[i] = s * traj.X[i];
    out.Q[i] = s * traj.Q[i];
    out.det_residual[i] = (out.P[i] * out.X[i] - out.Q[i] * out.Q[i] - bound) / bound;
  }
  return out;
}

/// Coherence series exp(-Gamma(t) dx^2) plus the detected recoherence
/// windows: maximal grid intervals where the finite-difference slope of
/// Gamma drops below -slope_tol (information backflow).
struct RecoherenceScan {
  TimeSeries coherence;
  std::vector<std::pair<double, double>> intervals;
};

inline RecoherenceScan gamma_t_series(const TimeSeries& gamma, double dx,
                                      double slope_tol = 0.0) {
  if (gamma.values.size() != gamma.grid.n || gamma.grid.n < 2)
    throw ValidationError("gamma series must be sampled on its grid");
  if (slope_tol < 0.0) throw ValidationError("slope_tol must be >= 0");
  RecoherenceScan scan;
  scan.coherence.name = "coherence";
  scan.coherence.units = "dimensionless";
  scan.coherence.grid = gamma.grid;
  scan.coherence.values.resize(gamma.grid.n);
  for (std::size_t i = 0; i < gamma.grid.n; ++i)
    scan.coherence.values[i] = std::exp(-gamma.values[i] * dx * dx);

  const std::vector<double> slope = finite_difference(gamma.values, gamma.grid.dt());
  std::size_t start = 0;
  bool open = false;
  for (std::size_t i = 0; i <= gamma.grid.n; ++i) {
    const bool falling = i < gamma.grid.n && slope[i] < -slope_tol;
    if (falling && !open) {
      start = i;
      open = true;
    } else if (!falling && open) {
      scan.intervals.emplace_back(gamma.grid.t(start), gamma.grid.t(i - 1));
      open = false;
    }
  }
  return scan;
}

}  // namespace qps
