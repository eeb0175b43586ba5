#pragma once

#include <cmath>

#include "qps/errors.hpp"

namespace qps {

/// Physical constants for a run. Defaults are natural units
/// (hbar = m = k_B T = 1); SI values can be supplied instead.
struct PhysicalConstants {
  double hbar = 1.0;
  double mass = 1.0;
  /// The product k_B * T stored as a single energy scalar.
  double boltzmann_kT = 1.0;

  void validate() const {
    if (!(hbar > 0.0) || !std::isfinite(hbar)) throw NonPositive("hbar must be > 0");
    if (!(mass > 0.0) || !std::isfinite(mass)) throw NonPositive("mass must be > 0");
    if (boltzmann_kT < 0.0 || !std::isfinite(boltzmann_kT))
      throw NonPositive("boltzmann_kT must be >= 0");
  }
};

}  // namespace qps
