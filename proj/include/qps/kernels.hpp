#pragma once

#include <cmath>
#include <utility>

#include "qps/errors.hpp"
#include "qps/time_series.hpp"

namespace qps {

/// Time-domain environment kernel (noise correlation or dissipation).
///
/// Analytic families:
///   Exponential        A exp(-tau/tau_c)
///   DampedOscillatory  A cos(omega0 tau) exp(-tau/tau_c)
///   NarrowDelta        (weight/width) exp(-tau/width), total mass -> weight
/// plus Tabulated for sampled kernels (linear interpolation, zero beyond the
/// table end).
struct MemoryKernel {
  enum class Kind { Exponential, DampedOscillatory, NarrowDelta, Tabulated };

  Kind kind = Kind::Exponential;
  double amplitude = 0.0;
  double tau_c = 1.0;
  double omega0 = 0.0;
  double weight = 0.0;
  double width = 1.0;
  TimeSeries table;

  static MemoryKernel exponential(double amplitude, double tau_c) {
    if (!(tau_c > 0.0)) throw NonPositive("kernel tau_c must be > 0");
    if (!std::isfinite(amplitude)) throw ValidationError("kernel amplitude must be finite");
    MemoryKernel k;
    k.kind = Kind::Exponential;
    k.amplitude = amplitude;
    k.tau_c = tau_c;
    return k;
  }

  static MemoryKernel damped_oscillatory(double amplitude, double tau_c, double omega0) {
    MemoryKernel k = exponential(amplitude, tau_c);
    k.kind = Kind::DampedOscillatory;
    k.omega0 = omega0;
    return k;
  }

  static MemoryKernel narrow_delta(double weight, double width) {
    if (!(width > 0.0)) throw NonPositive("kernel width must be > 0");
    if (!std::isfinite(weight)) throw ValidationError("kernel weight must be finite");
    MemoryKernel k;
    k.kind = Kind::NarrowDelta;
    k.weight = weight;
    k.width = width;
    return k;
  }

  static MemoryKernel tabulated(TimeSeries samples) {
    samples.grid.validate();
    if (samples.values.size() != samples.grid.n)
      throw ValidationError("tabulated kernel values must match its grid");
    MemoryKernel k;
    k.kind = Kind::Tabulated;
    k.table = std::move(samples);
    return k;
  }

  /// Identically zero kernel (an Exponential with zero amplitude).
  static MemoryKernel zero() { return exponential(0.0, 1.0); }
};

/// Kernel value at lag tau >= 0.
inline double kernel_eval(const MemoryKernel& k, double tau) {
  if (tau < 0.0) throw NegativeLag("memory kernels are defined for tau >= 0");
  switch (k.kind) {
    case MemoryKernel::Kind::Exponential:
      return k.amplitude * std::exp(-tau / k.tau_c);
    case MemoryKernel::Kind::DampedOscillatory:
      return k.amplitude * std::cos(k.omega0 * tau) * std::exp(-tau / k.tau_c);
    case MemoryKernel::Kind::NarrowDelta:
      return (k.weight / k.width) * std::exp(-tau / k.width);
    case MemoryKernel::Kind::Tabulated: {
      const double s = tau / k.table.grid.dt();
      const auto n = k.table.values.size();
      if (s >= static_cast<double>(n - 1)) return 0.0;
      const auto i = static_cast<std::size_t>(s);
      const double w = s - static_cast<double>(i);
      return k.table.values[i] * (1.0 - w) + k.table.values[i + 1] * w;
    }
  }
  return 0.0;
}

}  // namespace qps
