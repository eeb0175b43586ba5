#pragma once

// Umbrella header.

#include "qps/config.hpp"        // IWYU pragma: export
#include "qps/constants.hpp"     // IWYU pragma: export
#include "qps/errors.hpp"        // IWYU pragma: export
#include "qps/kernels.hpp"       // IWYU pragma: export
#include "qps/markov.hpp"        // IWYU pragma: export
#include "qps/multilevel.hpp"    // IWYU pragma: export
#include "qps/nonmarkov.hpp"     // IWYU pragma: export
#include "qps/phase_space.hpp"   // IWYU pragma: export
#include "qps/pointer_states.hpp"  // IWYU pragma: export
#include "qps/quadrature.hpp"    // IWYU pragma: export
#include "qps/runner.hpp"        // IWYU pragma: export
#include "qps/time_series.hpp"   // IWYU pragma: export
#include "qps/version.hpp"       // IWYU pragma: export
