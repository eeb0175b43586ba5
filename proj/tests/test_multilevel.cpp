#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

#include "qps/multilevel.hpp"

using namespace qps;
using Catch::Approx;
using cplx = std::complex<double>;

namespace {

Eigen::VectorXcd random_amplitudes(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXcd c(n);
  for (int i = 0; i < n; ++i) c(i) = cplx(u(rng), u(rng));
  return c / c.norm();
}

Eigen::VectorXcd equal_superposition(int n) {
  return Eigen::VectorXcd::Constant(n, cplx(1.0 / std::sqrt(static_cast<double>(n)), 0.0));
}

}  // namespace

TEST_CASE("model construction validates amplitudes") {
  CHECK_THROWS_AS(make_model(Eigen::VectorXcd::Constant(2, cplx(1.0, 0.0)),
                             OverlapModel::exponential_decay(1.0)),
                  ValidationError);
  CHECK_THROWS_AS(make_model(Eigen::VectorXcd{}, OverlapModel::exponential_decay(1.0)),
                  ValidationError);
  CHECK_NOTHROW(make_model(equal_superposition(4), OverlapModel::exponential_decay(1.0)));
}

TEST_CASE("reduced density at t = 0 is the pure projector") {
  std::mt19937_64 rng(51);
  const Eigen::VectorXcd c = random_amplitudes(5, rng);
  const MultilevelModel m = make_model(c, OverlapModel::exponential_decay(1.0));
  const ReducedDensity rho = reduced_density(m, 0.0);
  const Eigen::MatrixXcd projector = c * c.adjoint();
  CHECK((rho.matrix - projector).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(purity(rho) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two-level equal superposition off-diagonal at t = tau_D") {
  const MultilevelModel m = make_model(equal_superposition(2), OverlapModel::exponential_decay(1.0));
  const ReducedDensity rho = reduced_density(m, 1.0);
  CHECK(std::abs(rho.matrix(0, 1)) == Approx(0.5 * std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("off-diagonals are bounded by the decayed amplitudes product") {
  std::mt19937_64 rng(53);
  const double tau = 0.8;
  const Eigen::VectorXcd c = random_amplitudes(6, rng);
  const MultilevelModel m = make_model(c, OverlapModel::exponential_decay(tau));
  for (double t : {0.5, 2.0, 8.0}) {
    const ReducedDensity rho = reduced_density(m, t);
    const double f = std::exp(-t / tau);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        if (i == j) continue;
        CHECK(std::abs(rho.matrix(i, j)) <=
              std::abs(c(i)) * std::abs(c(j)) * f * (1.0 + 1e-12));
      }
  }
}

TEST_CASE("reduced density rejects negative times and bad overlaps") {
  const MultilevelModel m = make_model(equal_superposition(2), OverlapModel::exponential_decay(1.0));
  CHECK_THROWS_AS(reduced_density(m, -0.5), NegativeTime);

  const MultilevelModel bad_diag = make_model(
      equal_superposition(2),
      OverlapModel::user([](double) { return Eigen::MatrixXcd::Constant(2, 2, cplx(0.5, 0.0)); }));
  CHECK_THROWS_AS(reduced_density(bad_diag, 0.0), InvalidOverlap);

  const MultilevelModel non_hermitian = make_model(
      equal_superposition(2), OverlapModel::user([](double) {
        Eigen::MatrixXcd e = Eigen::MatrixXcd::Identity(2, 2);
        e(0, 1) = cplx(0.5, 0.0);
        e(1, 0) = cplx(0.1, 0.0);
        return e;
      }));
  CHECK_THROWS_AS(reduced_density(non_hermitian, 0.0), InvalidOverlap);

  const MultilevelModel indefinite = make_model(
      equal_superposition(2), OverlapModel::user([](double) {
        Eigen::MatrixXcd e = Eigen::MatrixXcd::Identity(2, 2);
        e(0, 1) = e(1, 0) = cplx(1.5, 0.0);  // Gram matrices cannot exceed 1
        return e;
      }));
  CHECK_THROWS_AS(reduced_density(indefinite, 0.0), InvalidOverlap);
}

TEST_CASE("partial trace agrees with an explicit environment embedding") {
  // factor the overlap Gram matrix as E = V^dagger V and evaluate the
  // environment sum literally in that orthonormal embedding basis
  std::mt19937_64 rng(57);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(trial % 5);
    const int m = n + 2;
    Eigen::MatrixXcd v(m, n);  // columns: environment states in C^m
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < m; ++i) v(i, j) = cplx(u(rng), u(rng));
      v.col(j).normalize();
    }
    const Eigen::MatrixXcd gram = v.adjoint() * v;  // E_ij = <e_i|e_j>
    const Eigen::VectorXcd c = random_amplitudes(n, rng);
    const MultilevelModel model =
        make_model(c, OverlapModel::user([gram](double) { return gram; }));
    const ReducedDensity rho = reduced_density(model, 0.3);

    Eigen::MatrixXcd literal = Eigen::MatrixXcd::Zero(n, n);
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          literal(i, j) += c(i) * std::conj(c(j)) * v(k, i) * std::conj(v(k, j));
    CHECK((rho.matrix - literal).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("structural invariants hold across time and models") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(trial % 7);
    const Eigen::VectorXcd c = random_amplitudes(n, rng);
    const OverlapModel overlaps = (trial % 2) ? OverlapModel::gaussian_decay(0.9)
                                              : OverlapModel::exponential_decay(1.3);
    const MultilevelModel m = make_model(c, overlaps);
    for (double t : {0.0, 0.4, 1.7, 6.0}) {
      const ReducedDensity rho = reduced_density(m, t);
      CHECK(std::abs(rho.matrix.trace().real() - 1.0) < 1e-12);
      CHECK(std::abs(rho.matrix.trace().imag()) < 1e-14);
      CHECK((rho.matrix - rho.matrix.adjoint()).cwiseAbs().maxCoeff() < 1e-13);
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.matrix,
                                                               Eigen::EigenvaluesOnly);
      CHECK(es.eigenvalues().minCoeff() >= -1e-10);
      for (int i = 0; i < n; ++i)
        CHECK(rho.matrix(i, i).real() == Approx(std::norm(c(i))).margin(1e-14));
    }
  }
}

TEST_CASE("long-time limit is the classical mixture") {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(trial % 7);
    const double tau = 0.5 + 0.1 * trial;
    const Eigen::VectorXcd c = random_amplitudes(n, rng);
    const MultilevelModel m = make_model(c, OverlapModel::exponential_decay(tau));
    const ReducedDensity rho = reduced_density(m, 20.0 * tau);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j)
          CHECK(rho.matrix(i, i).real() == Approx(std::norm(c(i))).margin(1e-8));
        else
          CHECK(std::abs(rho.matrix(i, j)) < 1e-8);
      }
  }
}

TEST_CASE("coherence_norm on hand-built cases") {
  const MultilevelModel m = make_model(equal_superposition(2), OverlapModel::exponential_decay(1.0));
  CHECK(coherence_norm(reduced_density(m, 0.0)) == Approx(1.0).epsilon(1e-12));
  CHECK(coherence_norm(reduced_density(m, 40.0)) == Approx(0.0).margin(1e-15));
  double prev = coherence_norm(reduced_density(m, 0.0));
  for (double t = 0.25; t <= 4.0; t += 0.25) {
    const double cur = coherence_norm(reduced_density(m, t));
    CHECK(cur <= prev + 1e-15);
    prev = cur;
  }
}

TEST_CASE("purity interpolates between pure and mixed endpoints") {
  {
    const MultilevelModel m =
        make_model(equal_superposition(2), OverlapModel::exponential_decay(1.0));
    CHECK(purity(reduced_density(m, 0.0)) == Approx(1.0).epsilon(1e-12));
    CHECK(purity(reduced_density(m, 50.0)) == Approx(0.5).epsilon(1e-10));
  }
  {
    const MultilevelModel m =
        make_model(equal_superposition(4), OverlapModel::exponential_decay(1.0));
    CHECK(purity(reduced_density(m, 50.0)) == Approx(0.25).epsilon(1e-10));
  }
}

TEST_CASE("decoherence_time recovers the model timescale") {
  const MultilevelModel m = make_model(equal_superposition(2), OverlapModel::exponential_decay(2.0));
  CHECK(decoherence_time(m, std::exp(-1.0)) == Approx(2.0).epsilon(1e-3));
  CHECK(decoherence_time(m, 1.0) == 0.0);
  // gaussian profile crosses 1/e at exactly tau_D as well
  const MultilevelModel g = make_model(equal_superposition(3), OverlapModel::gaussian_decay(1.5));
  CHECK(decoherence_time(g, std::exp(-1.0)) == Approx(1.5).epsilon(1e-3));
}

TEST_CASE("decoherence_time error paths") {
  const MultilevelModel identity_overlaps = make_model(
      equal_superposition(2),
      OverlapModel::user([](double) { return Eigen::MatrixXcd::Identity(2, 2).eval(); }));
  CHECK_THROWS_AS(decoherence_time(identity_overlaps, 0.5, 10.0), NotReached);
  CHECK_THROWS_AS(decoherence_time(identity_overlaps, 0.5), ValidationError);  // needs horizon
  const MultilevelModel m = make_model(equal_superposition(2), OverlapModel::exponential_decay(1.0));
  CHECK_THROWS_AS(decoherence_time(m, 0.0), ValidationError);
  CHECK_THROWS_AS(decoherence_time(m, 1.5), ValidationError);
}
