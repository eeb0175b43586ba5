#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <utility>

#include <Eigen/Dense>

#include "qps/errors.hpp"

namespace qps {

/// Environment overlap dynamics E_ij(t) = <e_i(t)|e_j(t)> for a system
/// entangled with n correlated environment branches. Built-in models keep
/// unit diagonal and a common decaying off-diagonal profile f(t):
///   ExponentialDecay  f(t) = exp(-t/tau_D)
///   GaussianDecay     f(t) = exp(-(t/tau_D)^2)
/// UserMatrix accepts an arbitrary map t -> E(t), validated on use.
class OverlapModel {
 public:
  using MatrixFn = std::function<Eigen::MatrixXcd(double)>;

  static OverlapModel exponential_decay(double tau_d) {
    if (!(tau_d > 0.0)) throw NonPositive("tau_D must be > 0");
    OverlapModel m;
    m.kind_ = Kind::Exponential;
    m.tau_d_ = tau_d;
    return m;
  }

  static OverlapModel gaussian_decay(double tau_d) {
    OverlapModel m = exponential_decay(tau_d);
    m.kind_ = Kind::Gaussian;
    return m;
  }

  static OverlapModel user(MatrixFn fn) {
    OverlapModel m;
    m.kind_ = Kind::User;
    m.fn_ = std::move(fn);
    return m;
  }

  bool builtin() const { return kind_ != Kind::User; }
  bool decaying() const { return builtin(); }
  double tau_d() const { return tau_d_; }

  /// Common off-diagonal profile of the built-in models.
  double profile(double t) const {
    switch (kind_) {
      case Kind::Exponential:
        return std::exp(-t / tau_d_);
      case Kind::Gaussian:
        return std::exp(-(t / tau_d_) * (t / tau_d_));
      case Kind::User:
        throw ValidationError("user overlap models have no scalar profile");
    }
    return 0.0;
  }

  /// Overlap matrix at time t. Built-in matrices are valid by construction;
  /// user matrices are checked for unit diagonal, Hermiticity and positive
  /// semidefiniteness (min eigenvalue >= -1e-10).
  Eigen::MatrixXcd matrix(double t, Eigen::Index n) const {
    if (builtin()) {
      const double f = profile(t);
      Eigen::MatrixXcd e = Eigen::MatrixXcd::Constant(n, n, f);
      e.diagonal().setOnes();
      return e;
    }
    Eigen::MatrixXcd e = fn_(t);
    if (e.rows() != n || e.cols() != n)
      throw InvalidOverlap("user overlap matrix has the wrong dimension");
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(e(i, i) - std::complex<double>(1.0, 0.0)) > 1e-10)
        throw InvalidOverlap("overlap matrix must have unit diagonal");
    if ((e - e.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
      throw InvalidOverlap("overlap matrix must be Hermitian");
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(e, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw InvalidOverlap("overlap matrix must be positive semidefinite");
    return e;
  }

 private:
  enum class Kind { Exponential, Gaussian, User };
  Kind kind_ = Kind::Exponential;
  double tau_d_ = 1.0;
  MatrixFn fn_;
};

/// Entangled system-environment model: n branches with amplitudes C^i
/// (unit norm) and an overlap model for the environment states.
struct MultilevelModel {
  Eigen::Index n = 0;
  Eigen::VectorXcd coeffs;
  OverlapModel overlaps = OverlapModel::exponential_decay(1.0);
};

inline MultilevelModel make_model(Eigen::VectorXcd coeffs, OverlapModel overlaps,
                                  Eigen::Index max_dimension = 64) {
  MultilevelModel m;
  m.n = coeffs.size();
  if (m.n < 1) throw ValidationError("model needs at least one branch");
  if (m.n > max_dimension)
    throw ValidationError("model dimension exceeds the dense-matrix cap");
  const double norm = coeffs.norm();
  if (std::abs(norm - 1.0) > 1e-6)
    throw ValidationError("branch amplitudes must have unit norm");
  m.coeffs = coeffs / norm;  // absorb round-off so the trace is exact
  m.overlaps = std::move(overlaps);
  return m;
}

/// Reduced system density matrix, Hermitian with unit trace.
struct ReducedDensity {
  Eigen::MatrixXcd matrix;
  double t = 0.0;
};

/// Traces the environment out of the entangled pure state. Over an
/// orthonormal environment basis the trace collapses by completeness to
///   rho_ij = C_i C_j^* <e_j|e_i>,
/// a Schur product of a rank-one projector with the overlap Gram matrix, so
/// the result is Hermitian, positive semidefinite, has exact diagonals
/// |C_i|^2 and unit trace. At t = 0 (all branches on one environment state)
/// this is the pure projector; once the overlaps die out only the diagonal
/// mixture survives.
inline ReducedDensity reduced_density(const MultilevelModel& model, double t) {
  if (t < 0.0) throw NegativeTime("reduced_density requires t >= 0");
  const Eigen::MatrixXcd e = model.overlaps.matrix(t, model.n);
  ReducedDensity rho;
  rho.t = t;
  rho.matrix = model.coeffs.asDiagonal() * e.transpose() *
               model.coeffs.conjugate().asDiagonal();
  return rho;
}

/// L1 norm of the off-diagonal entries (the surviving coherences).
inline double coherence_norm(const ReducedDensity& rho) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < rho.matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < rho.matrix.cols(); ++j)
      if (i != j) sum += std::abs(rho.matrix(i, j));
  return sum;
}

/// trace(rho^2); 1 for pure states, sum |C_i|^4 for the fully decohered
/// mixture.
inline double purity(const ReducedDensity& rho) {
  return (rho.matrix * rho.matrix).trace().real();
}

/// First time the relative coherence norm falls to the threshold,
/// bracketed on a scan grid and refined by bisection. For the built-in
/// exponential model at threshold 1/e this recovers tau_D.
///
/// Throws NotReached when the threshold is never crossed on [0, horizon]
/// (or when there is no initial coherence to decay). horizon <= 0 selects
/// 50 tau_D for built-in models and is invalid for user models.
inline double decoherence_time(const MultilevelModel& model, double threshold,
                               double horizon = -1.0) {
  if (!(threshold > 0.0) || threshold > 1.0)
    throw ValidationError("threshold must lie in (0, 1]");
  if (horizon <= 0.0) {
    if (!model.overlaps.builtin())
      throw ValidationError("user overlap models need an explicit horizon");
    horizon = 50.0 * model.overlaps.tau_d();
  }
  const double norm0 = coherence_norm(reduced_density(model, 0.0));
  if (norm0 <= 0.0) throw NotReached("model has no initial coherence to decay");
  auto ratio = [&](double t) { return coherence_norm(reduced_density(model, t)) / norm0; };

  if (ratio(0.0) <= threshold) return 0.0;
  constexpr std::size_t kScan = 2048;
  double lo = 0.0, hi = -1.0;
  for (std::size_t k = 1; k <= kScan; ++k) {
    const double t = horizon * static_cast<double>(k) / static_cast<double>(kScan);
    if (ratio(t) <= threshold) {
      hi = t;
      break;
    }
    lo = t;
  }
  if (hi < 0.0) throw NotReached("coherence never fell to the threshold on the horizon");
  for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ratio(mid) <= threshold ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace qps
