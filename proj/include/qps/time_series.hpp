#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qps/errors.hpp"

namespace qps {

/// Uniform time grid over [0, t_end] with n samples (endpoints included).
struct TimeGrid {
  double t_end = 1.0;
  std::size_t n = 2;

  double dt() const { return t_end / static_cast<double>(n - 1); }
  double t(std::size_t i) const { return t_end * static_cast<double>(i) / static_cast<double>(n - 1); }

  void validate(std::size_t min_points = 2) const {
    if (!(t_end > 0.0)) throw ValidationError("grid.t_end must be > 0");
    if (n < min_points)
      throw ValidationError("grid.n_points must be >= " + std::to_string(min_points));
  }
};

/// Uniformly sampled scalar quantity with light metadata.
struct TimeSeries {
  std::string name;
  std::string units;
  TimeGrid grid;
  std::vector<double> values;
};

/// Derivative of a uniformly sampled series: central differences in the
/// interior, one-sided at the two endpoints.
inline std::vector<double> finite_difference(const std::vector<double>& v, double dt) {
  if (v.size() < 2) throw ValidationError("finite_difference needs at least 2 samples");
  std::vector<double> d(v.size());
  const std::size_t n = v.size();
  d[0] = (v[1] - v[0]) / dt;
  d[n - 1] = (v[n - 1] - v[n - 2]) / dt;
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * dt);
  return d;
}

}  // namespace qps
