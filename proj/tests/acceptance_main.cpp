// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Every tolerance is pinned in code; the checks are the same oracle-backed
// identities the unit suites exercise, at full sample counts.

#include <array>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qps/qps.hpp"

using namespace qps;
using cplx = std::complex<double>;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& what, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << "  C" << id << "  " << what;
  if (!detail.empty()) std::cout << "  [" << detail << "]";
  std::cout << '\n';
  if (!pass) ++failures;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(3);
  ss << std::scientific << v;
  return ss.str();
}

// ---------------------------------------------------------------------------
// C1: saturated construction lands on det = hbar^2/4 (rel tol 1e-10)
void c1_saturation_identity() {
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> Xd(0.1, 10.0), Qd(-3.0, 3.0);
  const std::array<double, 3> hbars{0.5, 1.0, 2.0};
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double hb = hbars[static_cast<std::size_t>(i) % 3];
    const CovarianceMatrix g = saturated_from_XQ(Xd(rng), Qd(rng), hb);
    worst = std::max(worst, std::abs(g.det - hb * hb / 4.0) / (hb * hb / 4.0));
  }
  report(1, "saturated construction: det = hbar^2/4 over 1000 samples", worst <= 1e-10,
         "max rel dev " + fmt(worst));
}

// ---------------------------------------------------------------------------
// C2: closed-form density element vs quadrature-oracle product (rel tol 1e-6)
void c2_overlap_oracle_equivalence() {
  std::mt19937_64 rng(1002);
  std::uniform_real_distribution<double> Xd(0.4, 2.5), Qd(-1.0, 1.0), c(-1.0, 1.0), d(-0.9, 0.9);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const CovarianceMatrix g = saturated_from_XQ(Xd(rng), Qd(rng), 1.0);
    const PhasePoint z0{c(rng), c(rng)};
    const PhasePoint z{z0.p + d(rng), z0.x + d(rng)};
    const PhasePoint zp{z0.p + d(rng), z0.x + d(rng)};
    const cplx closed = rho_element(z, zp, z0, g).value;
    const cplx oracle = overlap_oracle(make_pointer_state(z, g), make_pointer_state(z0, g), 1e-9) *
                        overlap_oracle(make_pointer_state(z0, g), make_pointer_state(zp, g), 1e-9);
    worst = std::max(worst, std::abs(closed - oracle) / std::abs(oracle));
  }
  report(2, "density element matches the quadrature-oracle product (100 samples)", worst <= 1e-6,
         "max rel err " + fmt(worst));
}

// ---------------------------------------------------------------------------
// C3: analytic (Phi + i Theta) rho vs centered differences, both regimes
// (max rel err 1e-4)
void c3_derivative_identity() {
  const Trajectory traj = Trajectory::harmonic();
  const double h = 1e-5 * traj.period();
  std::mt19937_64 rng(1003);
  std::uniform_real_distribution<double> off(-0.8, 0.8);

  double worst_m = 0.0;
  {
    const CovarianceMatrix g = saturated_from_XQ(0.7, 0.3, 1.0);
    for (int k = 0; k < 25; ++k) {
      const double t = 0.2 + 0.23 * k;
      const PhasePoint z{off(rng), off(rng)}, zp{off(rng), off(rng)};
      const cplx analytic =
          rho_time_derivative(z, zp, traj, g, {0, 0, 0, traj.period()}, t, Regime::Markovian);
      const cplx fd = (rho_element(z, zp, traj.point_at(t + h), g).value -
                       rho_element(z, zp, traj.point_at(t - h), g).value) /
                      (2.0 * h);
      worst_m = std::max(worst_m,
                         std::abs(fd - analytic) / std::max(std::abs(analytic), std::abs(fd)));
    }
  }

  double worst_nm = 0.0;
  {
    auto X_of = [](double t) { return 0.8 * (1.0 + 0.2 * std::sin(0.6 * t)); };
    auto Q_of = [](double t) { return 0.1 + 0.25 * std::sin(0.9 * t); };
    auto G_of = [&](double t) { return saturated_from_XQ(X_of(t), Q_of(t), 1.0); };
    for (int k = 0; k < 25; ++k) {
      const double t = 0.2 + 0.23 * k;
      const PhasePoint z{off(rng), off(rng)}, zp{off(rng), off(rng)};
      const CovarianceMatrix g = G_of(t), gp = G_of(t + h), gm = G_of(t - h);
      const CovarianceRate rate{(gp.P - gm.P) / (2 * h), (gp.X - gm.X) / (2 * h),
                                (gp.Q - gm.Q) / (2 * h), traj.period()};
      const cplx analytic = rho_time_derivative(z, zp, traj, g, rate, t, Regime::NonMarkovian);
      const cplx fd = (rho_element(z, zp, traj.point_at(t + h), gp).value -
                       rho_element(z, zp, traj.point_at(t - h), gm).value) /
                      (2.0 * h);
      worst_nm = std::max(worst_nm,
                          std::abs(fd - analytic) / std::max(std::abs(analytic), std::abs(fd)));
    }
  }
  const double worst = std::max(worst_m, worst_nm);
  report(3, "derivative identity vs finite differences, static + breathing covariance",
         worst <= 1e-4, "max rel err " + fmt(worst));
}

// ---------------------------------------------------------------------------
// C4: channel identification — single channels saturate to 1e-12, pairs sit
// on or above the bound
void c4_lindblad_identification() {
  std::mt19937_64 rng(1004);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  auto friction_channel = [&]() {
    for (;;) {
      LindbladChannel ch{{u(rng), u(rng)}, {u(rng), u(rng)}};
      const double lambda = -std::imag(std::conj(ch.a) * ch.b);
      if (lambda > 0.05) return ch;
      if (lambda < -0.05) {
        ch.b = -ch.b;
        return ch;
      }
    }
  };

  double worst_single = 0.0;
  for (int i = 0; i < 500; ++i) {
    const double hb = (i % 3 == 0) ? 0.5 : (i % 3 == 1 ? 1.0 : 2.0);
    const std::array<LindbladChannel, 1> chans{{friction_channel()}};
    const CovarianceMatrix g = identify_qps(channel_coefficients(chans, hb), hb);
    worst_single = std::max(worst_single, std::abs(g.det - hb * hb / 4.0) / (hb * hb / 4.0));
  }

  double worst_pair = 0.0;  // most negative bound violation
  for (int i = 0; i < 500; ++i) {
    const std::array<LindbladChannel, 2> chans{{friction_channel(), friction_channel()}};
    const DiffusionSet d = channel_coefficients(chans, 1.0);
    if (d.Lambda <= 0.0) continue;
    const CovarianceMatrix g = identify_qps(d, 1.0);
    worst_pair = std::min(worst_pair, (g.det - 0.25) / 0.25);
  }
  const bool pass = worst_single <= 1e-12 && worst_pair >= -1e-12;
  report(4, "channel identification: single saturates, pairs respect the bound", pass,
         "single " + fmt(worst_single) + ", pair slack " + fmt(worst_pair));
}

// ---------------------------------------------------------------------------
// C5: narrow kernels converge monotonically to the constant coefficients
// (final rel err < 1e-3)
void c5_memoryless_limit() {
  const double omega = 1.0;
  const LindbladChannel channel{cplx(1.0, 0.0),
                                cplx(1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0))};
  const std::array<LindbladChannel, 1> chans{{channel}};
  const DiffusionSet ref = channel_coefficients(chans, 1.0);
  const TimeGrid grid{10.0, 65};

  bool monotone = true;
  double prev = 1e300, last = 0.0;
  for (double frac : {1e-2, 1e-3, 1e-4}) {
    const double eps = frac * grid.t_end;
    ChannelSpec spec;
    spec.channel = channel;
    spec.omega = omega;
    spec.noise = MemoryKernel::narrow_delta(1.0, eps);
    spec.dissipation = MemoryKernel::narrow_delta(1.0 / (omega * eps), eps);
    const std::array<ChannelSpec, 1> specs{{spec}};
    const CoefficientSeries cs = time_dependent_coefficients(specs, 1.0, grid, 1e-6, 18);
    const std::size_t i = grid.n - 1;
    const double err = std::max({std::abs(cs.D_xx[i] - ref.D_xx) / std::abs(ref.D_xx),
                                 std::abs(cs.D_pp[i] - ref.D_pp) / std::abs(ref.D_pp),
                                 std::abs(cs.D_px[i] - ref.D_px) / std::abs(ref.D_px),
                                 std::abs(cs.Lambda[i] - ref.Lambda) / std::abs(ref.Lambda)});
    if (err >= prev) monotone = false;
    prev = err;
    last = err;
  }
  report(5, "narrow-kernel plateaus converge monotonically to the constant coefficients",
         monotone && last < 1e-3, "final rel err " + fmt(last));
}

// ---------------------------------------------------------------------------
// C6: exponential-kernel running integral vs closed form (rel tol 1e-6)
void c6_quadrature_correctness() {
  const double tau_c = 1.0;
  ChannelSpec spec;
  spec.channel = {cplx(1, 0), cplx(0, -1)};
  spec.noise = MemoryKernel::exponential(1.0, tau_c);
  spec.dissipation = MemoryKernel::exponential(1.0, tau_c);
  spec.omega = 0.0;
  const std::array<ChannelSpec, 1> specs{{spec}};
  const TimeGrid grid{5.0, 257};
  const CoefficientSeries cs = time_dependent_coefficients(specs, 1.0, grid);
  double worst = 0.0;
  for (std::size_t i = 1; i < grid.n; ++i) {
    const double exact = 0.5 * tau_c * (1.0 - std::exp(-grid.t(i) / tau_c));
    worst = std::max(worst, std::abs(cs.D_xx[i] - exact) / exact);
  }
  report(6, "exponential-kernel integral matches its closed form across the grid",
         worst <= 1e-6, "max rel err " + fmt(worst));
}

// ---------------------------------------------------------------------------
// C7: underdamped noise produces recoherence windows, plain decay none
void c7_recoherence_detection() {
  const TimeGrid grid{5.0, 513};
  ChannelSpec osc;
  osc.channel = {cplx(1, 0), cplx(0, -1)};
  osc.noise = MemoryKernel::damped_oscillatory(1.0, 1.0, 10.0);  // omega0 tau_c = 10
  osc.dissipation = MemoryKernel::exponential(1.0, 1.0);
  osc.omega = 0.0;
  const std::array<ChannelSpec, 1> o{{osc}};
  TimeSeries gamma;
  gamma.grid = grid;
  gamma.values = time_dependent_coefficients(o, 1.0, grid).D_xx;
  const std::size_t oscillatory_count = gamma_t_series(gamma, 1.0).intervals.size();

  ChannelSpec plain = osc;
  plain.noise = MemoryKernel::exponential(1.0, 1.0);
  const std::array<ChannelSpec, 1> p{{plain}};
  TimeSeries gamma2;
  gamma2.grid = grid;
  gamma2.values = time_dependent_coefficients(p, 1.0, grid).D_xx;
  const std::size_t plain_count = gamma_t_series(gamma2, 1.0).intervals.size();

  report(7, "recoherence windows: underdamped kernel >= 1, exponential kernel = 0",
         oscillatory_count >= 1 && plain_count == 0,
         std::to_string(oscillatory_count) + " vs " + std::to_string(plain_count));
}

// ---------------------------------------------------------------------------
// C8: multilevel limits — mixture at 20 tau_D, timescale recovery at 1/e
void c8_multilevel_limits() {
  std::mt19937_64 rng(1008);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  bool pass = true;
  std::string detail;
  for (int trial = 0; trial < 20 && pass; ++trial) {
    const int n = 2 + trial % 7;  // n <= 8
    Eigen::VectorXcd c(n);
    for (int i = 0; i < n; ++i) c(i) = cplx(u(rng), u(rng));
    c.normalize();
    const double tau = 0.5 + 0.1 * (trial % 5);
    const MultilevelModel model = make_model(c, OverlapModel::exponential_decay(tau));

    const ReducedDensity rho = reduced_density(model, 20.0 * tau);
    if (std::abs(rho.matrix.trace().real() - 1.0) > 1e-12) {
      pass = false;
      detail = "trace deviates";
    }
    for (int i = 0; i < n && pass; ++i)
      for (int j = 0; j < n && pass; ++j) {
        if (i == j) {
          if (std::abs(rho.matrix(i, i).real() - std::norm(c(i))) > 1e-8) {
            pass = false;
            detail = "diagonal deviates";
          }
        } else if (std::abs(rho.matrix(i, j)) >= 1e-8) {
          pass = false;
          detail = "off-diagonal survives";
        }
      }

    const double tau_est = decoherence_time(model, std::exp(-1.0));
    if (std::abs(tau_est - tau) > 1e-3 * tau) {
      pass = false;
      detail = "timescale " + fmt(tau_est) + " vs " + fmt(tau);
    }
  }
  report(8, "multilevel mixture limits and timescale recovery (random models, n <= 8)", pass,
         detail);
}

// ---------------------------------------------------------------------------
// C9: exponential decay law values
void c9_decay_law() {
  const cplx rho0{0.8, -0.3};
  const cplx half = coherence_decay(rho0, 1.0, 2.0, std::log(2.0) / 2.0);
  const bool halves = std::abs(std::abs(half) - 0.5 * std::abs(rho0)) <= 1e-12;
  bool diagonal_flat = true;
  for (double t = 0.0; t <= 5.0; t += 0.25)
    if (coherence_decay(rho0, 0.0, 2.0, t) != rho0) diagonal_flat = false;
  report(9, "decay law: modulus halves at t = ln2/2 (Gamma=2, dx=1); dx=0 row constant",
         halves && diagonal_flat, "");
}

// ---------------------------------------------------------------------------
// C10: two CLI invocations produce byte-identical artifacts
void c10_determinism() {
  const char* cli = std::getenv("QPS_CLI");
#ifdef QPS_CLI_DEFAULT
  if (!cli || !*cli) cli = QPS_CLI_DEFAULT;
#endif
  if (!cli || !*cli) {
    report(10, "CLI determinism", false, "QPS_CLI not set");
    return;
  }
  const fs::path base = fs::temp_directory_path() / "qps_acceptance_determinism";
  fs::remove_all(base);
  fs::create_directories(base);
  const fs::path config = base / "config.json";
  {
    std::ofstream out(config);
    out << R"({
      "mode": "nonmarkov",
      "channels": [{
        "a": [1, 0], "b": [0.70710678118654752, -0.70710678118654752],
        "omega": 1.0,
        "noise_kernel": {"kind": "exponential", "amplitude": 1.0, "tau_c": 1.0},
        "dissipation_kernel": {"kind": "exponential", "amplitude": 1.0, "tau_c": 1.0}
      }],
      "grid": {"t_end": 6.0, "n_points": 65}
    })";
  }
  auto run_once = [&](const std::string& sub) {
    const fs::path dir = base / sub;
    const std::string cmd =
        std::string("\"") + cli + "\" run " + config.string() + " --out " + dir.string();
    return std::system(cmd.c_str()) == 0;
  };
  if (!run_once("a") || !run_once("b")) {
    report(10, "CLI determinism", false, "qps run exited nonzero");
    return;
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  bool identical = true;
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(base / "a")) {
    const fs::path other = base / "b" / entry.path().filename();
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) identical = false;
    ++compared;
  }
  report(10, "two CLI runs on one config are byte-identical", identical && compared >= 3,
         std::to_string(compared) + " files compared");
}

}  // namespace

int main() {
  c1_saturation_identity();
  c2_overlap_oracle_equivalence();
  c3_derivative_identity();
  c4_lindblad_identification();
  c5_memoryless_limit();
  c6_quadrature_correctness();
  c7_recoherence_detection();
  c8_multilevel_limits();
  c9_decay_law();
  c10_determinism();
  if (failures) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
