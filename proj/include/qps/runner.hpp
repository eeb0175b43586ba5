#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qps/config.hpp"
#include "qps/constants.hpp"
#include "qps/markov.hpp"
#include "qps/multilevel.hpp"
#include "qps/nonmarkov.hpp"
#include "qps/phase_space.hpp"
#include "qps/pointer_states.hpp"
#include "qps/version.hpp"

namespace qps {

/// Doubles are serialized with 17 significant digits so CSV round-trips are
/// exact at double precision; NaN gap markers print as "nan".
inline std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct RunArtifacts {
  nlohmann::json report;
  std::vector<std::pair<std::string, std::size_t>> files;  // name, data rows
};

namespace run_detail {

using nlohmann::json;

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
      : out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) out_ << ',';
      out_ << columns[i];
    }
    out_ << '\n';
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
    ++rows_;
  }

  std::size_t rows() const { return rows_; }

 private:
  std::ofstream out_;
  std::size_t rows_ = 0;
};

inline json base_report(const RunConfig& cfg) {
  json report;
  report["schema_version"] = kReportSchemaVersion;
  report["tool_version"] = kVersion;
  report["mode"] = to_string(cfg.mode);
  report["config"] = cfg.echo;
  report["warnings"] = json::array();
  return report;
}

inline void run_markov(const RunConfig& cfg, const std::filesystem::path& dir,
                       RunArtifacts& art) {
  const MarkovConfig& mc = cfg.markov;
  const double hb = cfg.constants.hbar;
  const DiffusionSet d =
      channel_coefficients(mc.channels, hb, mc.allow_many_channels);
  const CovarianceMatrix g = identify_qps(d, hb);
  if (!g.saturated)
    art.report["warnings"].push_back(
        "identified covariance matrix is above the uncertainty bound (det residual " +
        fmt17(g.det / (hb * hb / 4.0) - 1.0) + "); the channels are not proportional");

  // a stationary environment has identically zero covariance rates
  const CovarianceRate rate{0.0, 0.0, 0.0, cfg.grid.t_end};
  const Regime regime = classify_regime(rate, g, 1e-9);

  const Trajectory still = Trajectory::stationary();
  const QuadraticHamiltonian h = hamiltonian_coefficients(g, cfg.constants, still, 0.0);
  const double gamma = gamma_markov(cfg.constants, mc.gamma_friction);

  if (cfg.output.csv) {
    CsvWriter csv(dir / "coherence.csv", {"t", "coherence_re", "coherence_im"});
    for (std::size_t i = 0; i < cfg.grid.n; ++i) {
      const double t = cfg.grid.t(i);
      const std::complex<double> c = coherence_decay(mc.rho0, mc.dx, gamma, t);
      csv.row({fmt17(t), fmt17(c.real()), fmt17(c.imag())});
    }
    art.files.emplace_back("coherence.csv", csv.rows());
  }

  json& s = art.report["scalars"];
  s["P"] = g.P;
  s["X"] = g.X;
  s["Q"] = g.Q;
  s["det_residual"] = g.det / (hb * hb / 4.0) - 1.0;
  s["saturation"] = g.saturated ? "exact" : "above-bound";
  s["D_pp"] = d.D_pp;
  s["D_xx"] = d.D_xx;
  s["D_px"] = d.D_px;
  s["Lambda"] = d.Lambda;
  s["gamma"] = gamma;
  s["A_pp"] = h.A_pp;
  s["A_xx"] = h.A_xx;
  s["A_px"] = h.A_px;
  art.report["regime"] = regime == Regime::Markovian ? "Markovian" : "NonMarkovian";
}

inline void run_nonmarkov(const RunConfig& cfg, const std::filesystem::path& dir,
                          RunArtifacts& art) {
  const NonMarkovConfig& nc = cfg.nonmarkov;
  const double hb = cfg.constants.hbar;
  const CoefficientSeries cs = time_dependent_coefficients(nc.channels, hb, cfg.grid);
  QPSTrajectory traj = qps_trajectory(cs, hb, nc.epsilon_lambda);
  const SaturationAudit audit = saturation_audit(traj, hb, nc.audit_tol);
  if (nc.project) traj = project_to_saturation(traj, hb);

  // decoherence exponent proxy: position diffusion feeds the decay exponent
  TimeSeries gamma_series;
  gamma_series.name = "gamma";
  gamma_series.grid = cfg.grid;
  gamma_series.values = cs.D_xx;
  const RecoherenceScan scan = gamma_t_series(gamma_series, nc.dx, nc.slope_tol);

  if (cfg.output.csv) {
    CsvWriter csv(dir / "coefficients.csv", {"t", "D_pp", "D_xx", "D_px", "Lambda", "P", "X", "Q",
                                             "det_residual", "masked"});
    for (std::size_t i = 0; i < cfg.grid.n; ++i)
      csv.row({fmt17(cfg.grid.t(i)), fmt17(cs.D_pp[i]), fmt17(cs.D_xx[i]), fmt17(cs.D_px[i]),
               fmt17(cs.Lambda[i]), fmt17(traj.P[i]), fmt17(traj.X[i]), fmt17(traj.Q[i]),
               fmt17(traj.det_residual[i]), traj.masked[i] ? "1" : "0"});
    art.files.emplace_back("coefficients.csv", csv.rows());

    CsvWriter rcsv(dir / "recoherence.csv", {"t", "gamma", "coherence"});
    for (std::size_t i = 0; i < cfg.grid.n; ++i)
      rcsv.row({fmt17(cfg.grid.t(i)), fmt17(gamma_series.values[i]),
                fmt17(scan.coherence.values[i])});
    art.files.emplace_back("recoherence.csv", rcsv.rows());
  }

  // classify from finite differences over the longest unmasked block
  std::string regime = "unknown";
  {
    std::size_t best_lo = 0, best_len = 0, lo = 0, len = 0;
    for (std::size_t i = 0; i <= cfg.grid.n; ++i) {
      if (i < cfg.grid.n && !traj.masked[i]) {
        if (len == 0) lo = i;
        ++len;
      } else {
        if (len > best_len) {
          best_len = len;
          best_lo = lo;
        }
        len = 0;
      }
    }
    if (best_len >= 3) {
      std::vector<double> p(traj.P.begin() + best_lo, traj.P.begin() + best_lo + best_len);
      std::vector<double> x(traj.X.begin() + best_lo, traj.X.begin() + best_lo + best_len);
      std::vector<double> q(traj.Q.begin() + best_lo, traj.Q.begin() + best_lo + best_len);
      const auto pd = finite_difference(p, cfg.grid.dt());
      const auto xd = finite_difference(x, cfg.grid.dt());
      const auto qd = finite_difference(q, cfg.grid.dt());
      const double pm = std::abs(p[best_len - 1]), xm = std::abs(x[best_len - 1]);
      double measure = 0.0;
      for (std::size_t i = 0; i < best_len; ++i)
        measure = std::max({measure, std::abs(pd[i]) * cfg.grid.t_end / pm,
                            std::abs(xd[i]) * cfg.grid.t_end / xm,
                            std::abs(qd[i]) * cfg.grid.t_end / std::sqrt(pm * xm)});
      regime = measure <= 1e-6 ? "Markovian" : "NonMarkovian";
    }
  }

  json& s = art.report["scalars"];
  s["max_saturation_residual"] = audit.max_abs_residual;
  s["fraction_within_tol"] = audit.fraction_within_tol;
  s["audit_pass"] = audit.pass;
  s["audit_tol"] = audit.tol;
  s["projected"] = nc.project;
  s["recoherence_interval_count"] = scan.intervals.size();
  s["unmasked_fraction"] =
      static_cast<double>(traj.unmasked_count) / static_cast<double>(cfg.grid.n);
  json intervals = json::array();
  for (const auto& [a, b] : scan.intervals) intervals.push_back({a, b});
  s["recoherence_intervals"] = intervals;
  art.report["regime"] = regime;
}

inline void run_multilevel(const RunConfig& cfg, const std::filesystem::path& dir,
                           RunArtifacts& art) {
  const MultilevelConfig& ml = cfg.multilevel;
  Eigen::VectorXcd coeffs(ml.dimension);
  for (int i = 0; i < ml.dimension; ++i) coeffs(i) = ml.coefficients[static_cast<std::size_t>(i)];
  const OverlapModel overlaps = ml.gaussian ? OverlapModel::gaussian_decay(ml.tau_d)
                                            : OverlapModel::exponential_decay(ml.tau_d);
  const MultilevelModel model = make_model(std::move(coeffs), overlaps);

  if (cfg.output.csv) {
    CsvWriter csv(dir / "multilevel.csv", {"t", "coherence_norm", "purity"});
    for (std::size_t i = 0; i < cfg.grid.n; ++i) {
      const double t = cfg.grid.t(i);
      const ReducedDensity rho = reduced_density(model, t);
      csv.row({fmt17(t), fmt17(coherence_norm(rho)), fmt17(purity(rho))});
    }
    art.files.emplace_back("multilevel.csv", csv.rows());
  }

  const double tau = decoherence_time(model, ml.threshold, ml.horizon);
  const ReducedDensity final_rho = reduced_density(model, cfg.grid.t_end);
  json& s = art.report["scalars"];
  s["tau_d_estimate"] = tau;
  s["threshold"] = ml.threshold;
  s["final_coherence_norm"] = coherence_norm(final_rho);
  s["final_purity"] = purity(final_rho);
  art.report["regime"] = "n/a";
}

inline void run_derivative_check(const RunConfig& cfg, const std::filesystem::path& dir,
                                 RunArtifacts& art) {
  const DerivativeCheckConfig& dc = cfg.derivative_check;
  const double hb = cfg.constants.hbar;
  const Trajectory traj = Trajectory::harmonic(dc.amplitude, dc.omega, cfg.constants.mass);
  const double h = dc.fd_step_factor * traj.period();

  // time-dependent saturated covariance family for the reactive-regime check
  auto x_of = [&](double t) { return dc.X * (1.0 + dc.x_mod_amp * std::sin(dc.x_mod_freq * t)); };
  auto q_of = [&](double t) { return dc.Q + dc.q_mod_amp * std::sin(dc.q_mod_freq * t); };
  auto g_of = [&](double t) { return saturated_from_XQ(x_of(t), q_of(t), hb); };

  std::mt19937_64 rng(dc.seed);
  std::uniform_real_distribution<double> offset(-0.8, 0.8);

  std::unique_ptr<CsvWriter> csv;
  if (cfg.output.csv)
    csv = std::make_unique<CsvWriter>(
        dir / "derivative_check.csv",
        std::vector<std::string>{"regime", "t", "z_p", "z_x", "zp_p", "zp_x", "analytic_re",
                                 "analytic_im", "fd_re", "fd_im", "rel_err"});

  double worst_m = 0.0, worst_nm = 0.0;
  for (int k = 0; k < dc.probes; ++k) {
    const double t =
        cfg.grid.t_end * (static_cast<double>(k) + 0.5) / static_cast<double>(dc.probes);
    const PhasePoint z{offset(rng), offset(rng)};
    const PhasePoint zp{offset(rng), offset(rng)};

    // static covariance: compare against a centered difference along the
    // trajectory alone
    {
      const CovarianceMatrix g = saturated_from_XQ(dc.X, dc.Q, hb);
      const CovarianceRate zero{0.0, 0.0, 0.0, traj.period()};
      const std::complex<double> analytic =
          rho_time_derivative(z, zp, traj, g, zero, t, Regime::Markovian);
      const std::complex<double> fd =
          (rho_element(z, zp, traj.point_at(t + h), g).value -
           rho_element(z, zp, traj.point_at(t - h), g).value) /
          (2.0 * h);
      const double denom = std::max({std::abs(analytic), std::abs(fd), 1e-14});
      const double err = std::abs(fd - analytic) / denom;
      worst_m = std::max(worst_m, err);
      if (csv)
        csv->row({"Markovian", fmt17(t), fmt17(z.p), fmt17(z.x), fmt17(zp.p), fmt17(zp.x),
                  fmt17(analytic.real()), fmt17(analytic.imag()), fmt17(fd.real()),
                  fmt17(fd.imag()), fmt17(err)});
    }

    // breathing covariance: the rate enters through -G^{-1} Gdot G^{-1}
    {
      const CovarianceMatrix g = g_of(t);
      const CovarianceMatrix gp = g_of(t + h);
      const CovarianceMatrix gm = g_of(t - h);
      const CovarianceRate rate{(gp.P - gm.P) / (2.0 * h), (gp.X - gm.X) / (2.0 * h),
                                (gp.Q - gm.Q) / (2.0 * h), traj.period()};
      const std::complex<double> analytic =
          rho_time_derivative(z, zp, traj, g, rate, t, Regime::NonMarkovian);
      const std::complex<double> fd = (rho_element(z, zp, traj.point_at(t + h), gp).value -
                                       rho_element(z, zp, traj.point_at(t - h), gm).value) /
                                      (2.0 * h);
      const double denom = std::max({std::abs(analytic), std::abs(fd), 1e-14});
      const double err = std::abs(fd - analytic) / denom;
      worst_nm = std::max(worst_nm, err);
      if (csv)
        csv->row({"NonMarkovian", fmt17(t), fmt17(z.p), fmt17(z.x), fmt17(zp.p), fmt17(zp.x),
                  fmt17(analytic.real()), fmt17(analytic.imag()), fmt17(fd.real()),
                  fmt17(fd.imag()), fmt17(err)});
    }
  }
  if (csv) art.files.emplace_back("derivative_check.csv", csv->rows());

  json& s = art.report["scalars"];
  s["fd_vs_analytic_max_rel_err"] = std::max(worst_m, worst_nm);
  s["markovian_max_rel_err"] = worst_m;
  s["nonmarkovian_max_rel_err"] = worst_nm;
  s["fd_step"] = h;
  s["probes"] = dc.probes;
  art.report["regime"] = "both";
}

inline void write_gnuplot(const RunConfig& cfg, const std::filesystem::path& dir,
                          RunArtifacts& art) {
  std::ofstream gp(dir / "plot.gp", std::ios::binary);
  gp << "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\n";
  switch (cfg.mode) {
    case Mode::Markov:
      gp << "plot 'coherence.csv' using 1:2 with lines\n";
      break;
    case Mode::NonMarkov:
      gp << "plot 'coefficients.csv' using 1:3 with lines, '' using 1:5 with lines\n";
      break;
    case Mode::Multilevel:
      gp << "plot 'multilevel.csv' using 1:2 with lines, '' using 1:3 with lines\n";
      break;
    case Mode::DerivativeCheck:
      gp << "plot 'derivative_check.csv' using 2:11 with points\n";
      break;
  }
  gp.close();
  art.files.emplace_back("plot.gp", 0);
}

}  // namespace run_detail

/// Executes a validated configuration, writing the per-mode CSV artifacts
/// and report.json into out_dir. Deterministic: identical configs and tool
/// version produce byte-identical outputs.
inline RunArtifacts run(const RunConfig& cfg, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  fs::create_directories(dir);

  RunArtifacts art;
  art.report = run_detail::base_report(cfg);
  switch (cfg.mode) {
    case Mode::Markov:
      run_detail::run_markov(cfg, dir, art);
      break;
    case Mode::NonMarkov:
      run_detail::run_nonmarkov(cfg, dir, art);
      break;
    case Mode::Multilevel:
      run_detail::run_multilevel(cfg, dir, art);
      break;
    case Mode::DerivativeCheck:
      run_detail::run_derivative_check(cfg, dir, art);
      break;
  }
  if (cfg.output.gnuplot) run_detail::write_gnuplot(cfg, dir, art);

  nlohmann::json files = nlohmann::json::array();
  for (const auto& [name, rows] : art.files) files.push_back({{"name", name}, {"rows", rows}});
  art.report["files"] = files;

  if (cfg.output.json) {
    std::ofstream out(dir / "report.json", std::ios::binary);
    if (!out) throw Error("cannot write report.json");
    out << art.report.dump(2) << '\n';
  }
  return art;
}

}  // namespace qps
