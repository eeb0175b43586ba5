#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qps/constants.hpp"
#include "qps/errors.hpp"
#include "qps/kernels.hpp"
#include "qps/markov.hpp"
#include "qps/nonmarkov.hpp"
#include "qps/time_series.hpp"

namespace qps {

enum class Mode { Markov, NonMarkov, Multilevel, DerivativeCheck };

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::Markov:
      return "markov";
    case Mode::NonMarkov:
      return "nonmarkov";
    case Mode::Multilevel:
      return "multilevel";
    case Mode::DerivativeCheck:
      return "derivative-check";
  }
  return "?";
}

struct OutputSpec {
  std::string directory;  // empty: resolved by the CLI (flag, env, cwd)
  bool csv = true;
  bool json = true;
  bool gnuplot = false;
};

struct MarkovConfig {
  std::vector<LindbladChannel> channels;
  bool allow_many_channels = false;
  double gamma_friction = 1.0;
  double dx = 1.0;
  std::complex<double> rho0{1.0, 0.0};
};

struct NonMarkovConfig {
  std::vector<ChannelSpec> channels;
  double epsilon_lambda = 1e-9;
  double dx = 1.0;
  double audit_tol = 0.01;
  bool project = false;
  double slope_tol = 0.0;
};

struct MultilevelConfig {
  int dimension = 0;
  std::vector<std::complex<double>> coefficients;
  bool gaussian = false;  // false: exponential overlap decay
  double tau_d = 1.0;
  double threshold = 0.36787944117144233;  // 1/e
  double horizon = -1.0;                   // <= 0: auto (50 tau_D)
};

struct DerivativeCheckConfig {
  double X = 0.5;
  double Q = 0.0;
  double amplitude = 1.0;
  double omega = 1.0;
  double fd_step_factor = 1e-5;
  int probes = 6;
  unsigned seed = 20240801;
  // covariance modulation used for the time-dependent-regime check
  double x_mod_amp = 0.2;
  double x_mod_freq = 0.6;
  double q_mod_amp = 0.25;
  double q_mod_freq = 0.9;
};

struct RunConfig {
  Mode mode = Mode::Markov;
  PhysicalConstants constants;
  TimeGrid grid{10.0, 256};
  OutputSpec output;
  MarkovConfig markov;
  NonMarkovConfig nonmarkov;
  MultilevelConfig multilevel;
  DerivativeCheckConfig derivative_check;
  nlohmann::json echo;  // the parsed document, replayed verbatim in reports
};

namespace cfg_detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& path,
                           std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (key == k) {
        ok = true;
        break;
      }
    if (!ok) throw ValidationError("unknown key \"" + path + key + "\"");
  }
}

inline const json& require(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError("missing key \"" + path + key + "\"");
  return *it;
}

inline double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ValidationError("\"" + path + "\" must be a number");
  return v.get<double>();
}

inline double number_or(const json& obj, const std::string& path, const char* key,
                        double fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : number(*it, path + key);
}

inline bool boolean_or(const json& obj, const std::string& path, const char* key, bool fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) throw ValidationError("\"" + path + key + "\" must be a boolean");
  return it->get<bool>();
}

// complex numbers ride as two-element [re, im] arrays
inline std::complex<double> complex_pair(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2)
    throw ValidationError("\"" + path + "\" must be a [re, im] pair");
  return {number(v[0], path + "[0]"), number(v[1], path + "[1]")};
}

inline MemoryKernel kernel(const json& v, const std::string& path) {
  if (!v.is_object()) throw ValidationError("\"" + path + "\" must be an object");
  const std::string kind = require(v, path + ".", "kind").get<std::string>();
  if (kind == "exponential") {
    reject_unknown(v, path + ".", {"kind", "amplitude", "tau_c"});
    return MemoryKernel::exponential(number(require(v, path + ".", "amplitude"), path + ".amplitude"),
                                     number(require(v, path + ".", "tau_c"), path + ".tau_c"));
  }
  if (kind == "damped_oscillatory") {
    reject_unknown(v, path + ".", {"kind", "amplitude", "tau_c", "omega0"});
    return MemoryKernel::damped_oscillatory(
        number(require(v, path + ".", "amplitude"), path + ".amplitude"),
        number(require(v, path + ".", "tau_c"), path + ".tau_c"),
        number(require(v, path + ".", "omega0"), path + ".omega0"));
  }
  if (kind == "narrow_delta") {
    reject_unknown(v, path + ".", {"kind", "weight", "width"});
    return MemoryKernel::narrow_delta(number(require(v, path + ".", "weight"), path + ".weight"),
                                      number(require(v, path + ".", "width"), path + ".width"));
  }
  if (kind == "tabulated") {
    reject_unknown(v, path + ".", {"kind", "t_end", "values"});
    const json& vals = require(v, path + ".", "values");
    if (!vals.is_array() || vals.size() < 2)
      throw ValidationError("\"" + path + ".values\" must be an array of >= 2 numbers");
    TimeSeries ts;
    ts.name = "kernel";
    ts.grid = {number(require(v, path + ".", "t_end"), path + ".t_end"), vals.size()};
    for (std::size_t i = 0; i < vals.size(); ++i)
      ts.values.push_back(number(vals[i], path + ".values[" + std::to_string(i) + "]"));
    return MemoryKernel::tabulated(std::move(ts));
  }
  throw ValidationError("\"" + path + ".kind\" must be one of exponential, damped_oscillatory, "
                        "narrow_delta, tabulated");
}

}  // namespace cfg_detail

/// Parses and validates a run configuration document. Unknown keys are
/// rejected with their full key path; mode-specific sections are required
/// to match the selected mode.
inline RunConfig parse_config(const std::string& text) {
  using nlohmann::json;
  using namespace cfg_detail;

  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("config root must be a JSON object");

  RunConfig cfg;
  cfg.echo = doc;

  const std::string mode = require(doc, "", "mode").get<std::string>();
  if (mode == "markov")
    cfg.mode = Mode::Markov;
  else if (mode == "nonmarkov")
    cfg.mode = Mode::NonMarkov;
  else if (mode == "multilevel")
    cfg.mode = Mode::Multilevel;
  else if (mode == "derivative-check")
    cfg.mode = Mode::DerivativeCheck;
  else
    throw ValidationError("\"mode\" must be markov, nonmarkov, multilevel or derivative-check");

  reject_unknown(doc, "", {"mode", "constants", "grid", "output", "channels",
                           "allow_many_channels", "gamma_friction", "dx", "rho0",
                           "epsilon_lambda", "audit_tol", "project", "slope_tol", "dimension",
                           "coefficients", "overlap_model", "threshold", "horizon",
                           "derivative_check"});

  if (auto it = doc.find("constants"); it != doc.end()) {
    reject_unknown(*it, "constants.", {"hbar", "mass", "boltzmann_kT"});
    cfg.constants.hbar = number_or(*it, "constants.", "hbar", 1.0);
    cfg.constants.mass = number_or(*it, "constants.", "mass", 1.0);
    cfg.constants.boltzmann_kT = number_or(*it, "constants.", "boltzmann_kT", 1.0);
    cfg.constants.validate();
  }

  {
    const json& grid = require(doc, "", "grid");
    reject_unknown(grid, "grid.", {"t_end", "n_points"});
    cfg.grid.t_end = number(require(grid, "grid.", "t_end"), "grid.t_end");
    const json& np = require(grid, "grid.", "n_points");
    if (!np.is_number_unsigned()) throw ValidationError("\"grid.n_points\" must be a positive integer");
    cfg.grid.n = np.get<std::size_t>();
    cfg.grid.validate(64);
  }

  if (auto it = doc.find("output"); it != doc.end()) {
    reject_unknown(*it, "output.", {"directory", "formats"});
    if (auto d = it->find("directory"); d != it->end())
      cfg.output.directory = d->get<std::string>();
    if (auto f = it->find("formats"); f != it->end()) {
      if (!f->is_array()) throw ValidationError("\"output.formats\" must be an array");
      cfg.output.csv = cfg.output.json = cfg.output.gnuplot = false;
      for (const auto& fmt : *f) {
        const std::string s = fmt.get<std::string>();
        if (s == "csv")
          cfg.output.csv = true;
        else if (s == "json")
          cfg.output.json = true;
        else if (s == "gnuplot")
          cfg.output.gnuplot = true;
        else
          throw ValidationError("\"output.formats\" entries must be csv, json or gnuplot");
      }
    }
  }

  auto forbid = [&](const char* key, const char* wanted_mode) {
    if (doc.contains(key))
      throw ValidationError(std::string("key \"") + key + "\" is only valid in " + wanted_mode +
                            " mode");
  };

  switch (cfg.mode) {
    case Mode::Markov: {
      forbid("epsilon_lambda", "nonmarkov");
      forbid("dimension", "multilevel");
      forbid("derivative_check", "derivative-check");
      const json& chans = require(doc, "", "channels");
      if (!chans.is_array() || chans.empty())
        throw ValidationError("\"channels\" must be a nonempty array");
      for (std::size_t j = 0; j < chans.size(); ++j) {
        const std::string path = "channels[" + std::to_string(j) + "]";
        reject_unknown(chans[j], path + ".", {"a", "b"});
        cfg.markov.channels.push_back(
            {complex_pair(require(chans[j], path + ".", "a"), path + ".a"),
             complex_pair(require(chans[j], path + ".", "b"), path + ".b")});
      }
      cfg.markov.allow_many_channels = boolean_or(doc, "", "allow_many_channels", false);
      cfg.markov.gamma_friction = number_or(doc, "", "gamma_friction", 1.0);
      cfg.markov.dx = number_or(doc, "", "dx", 1.0);
      if (auto r = doc.find("rho0"); r != doc.end())
        cfg.markov.rho0 = complex_pair(*r, "rho0");
      break;
    }
    case Mode::NonMarkov: {
      forbid("gamma_friction", "markov");
      forbid("dimension", "multilevel");
      forbid("derivative_check", "derivative-check");
      const json& chans = require(doc, "", "channels");
      if (!chans.is_array() || chans.empty())
        throw ValidationError("\"channels\" must be a nonempty array");
      for (std::size_t j = 0; j < chans.size(); ++j) {
        const std::string path = "channels[" + std::to_string(j) + "]";
        reject_unknown(chans[j], path + ".",
                       {"a", "b", "omega", "noise_kernel", "dissipation_kernel"});
        ChannelSpec spec;
        spec.channel = {complex_pair(require(chans[j], path + ".", "a"), path + ".a"),
                        complex_pair(require(chans[j], path + ".", "b"), path + ".b")};
        spec.omega = number_or(chans[j], path + ".", "omega", 0.0);
        spec.noise = kernel(require(chans[j], path + ".", "noise_kernel"), path + ".noise_kernel");
        spec.dissipation = kernel(require(chans[j], path + ".", "dissipation_kernel"),
                                  path + ".dissipation_kernel");
        cfg.nonmarkov.channels.push_back(std::move(spec));
      }
      cfg.nonmarkov.epsilon_lambda = number_or(doc, "", "epsilon_lambda", 1e-9);
      cfg.nonmarkov.dx = number_or(doc, "", "dx", 1.0);
      cfg.nonmarkov.audit_tol = number_or(doc, "", "audit_tol", 0.01);
      cfg.nonmarkov.project = boolean_or(doc, "", "project", false);
      cfg.nonmarkov.slope_tol = number_or(doc, "", "slope_tol", 0.0);
      break;
    }
    case Mode::Multilevel: {
      forbid("channels", "markov/nonmarkov");
      forbid("derivative_check", "derivative-check");
      const json& dim = require(doc, "", "dimension");
      if (!dim.is_number_unsigned() || dim.get<int>() < 1)
        throw ValidationError("\"dimension\" must be a positive integer");
      cfg.multilevel.dimension = dim.get<int>();
      const json& coeffs = require(doc, "", "coefficients");
      if (!coeffs.is_array() || static_cast<int>(coeffs.size()) != cfg.multilevel.dimension)
        throw ValidationError("\"coefficients\" must be an array of length \"dimension\"");
      for (std::size_t i = 0; i < coeffs.size(); ++i)
        cfg.multilevel.coefficients.push_back(
            complex_pair(coeffs[i], "coefficients[" + std::to_string(i) + "]"));
      const json& om = require(doc, "", "overlap_model");
      reject_unknown(om, "overlap_model.", {"kind", "tau_d"});
      const std::string kind = require(om, "overlap_model.", "kind").get<std::string>();
      if (kind == "exponential")
        cfg.multilevel.gaussian = false;
      else if (kind == "gaussian")
        cfg.multilevel.gaussian = true;
      else
        throw ValidationError("\"overlap_model.kind\" must be exponential or gaussian");
      cfg.multilevel.tau_d = number(require(om, "overlap_model.", "tau_d"), "overlap_model.tau_d");
      cfg.multilevel.threshold = number_or(doc, "", "threshold", cfg.multilevel.threshold);
      cfg.multilevel.horizon = number_or(doc, "", "horizon", -1.0);
      break;
    }
    case Mode::DerivativeCheck: {
      forbid("channels", "markov/nonmarkov");
      forbid("dimension", "multilevel");
      if (auto it = doc.find("derivative_check"); it != doc.end()) {
        reject_unknown(*it, "derivative_check.",
                       {"X", "Q", "amplitude", "omega", "fd_step_factor", "probes", "seed",
                        "x_mod_amp", "x_mod_freq", "q_mod_amp", "q_mod_freq"});
        DerivativeCheckConfig& dc = cfg.derivative_check;
        dc.X = number_or(*it, "derivative_check.", "X", dc.X);
        dc.Q = number_or(*it, "derivative_check.", "Q", dc.Q);
        dc.amplitude = number_or(*it, "derivative_check.", "amplitude", dc.amplitude);
        dc.omega = number_or(*it, "derivative_check.", "omega", dc.omega);
        dc.fd_step_factor = number_or(*it, "derivative_check.", "fd_step_factor", dc.fd_step_factor);
        dc.probes = static_cast<int>(number_or(*it, "derivative_check.", "probes", dc.probes));
        dc.seed = static_cast<unsigned>(number_or(*it, "derivative_check.", "seed", dc.seed));
        dc.x_mod_amp = number_or(*it, "derivative_check.", "x_mod_amp", dc.x_mod_amp);
        dc.x_mod_freq = number_or(*it, "derivative_check.", "x_mod_freq", dc.x_mod_freq);
        dc.q_mod_amp = number_or(*it, "derivative_check.", "q_mod_amp", dc.q_mod_amp);
        dc.q_mod_freq = number_or(*it, "derivative_check.", "q_mod_freq", dc.q_mod_freq);
      }
      break;
    }
  }
  return cfg;
}

}  // namespace qps
