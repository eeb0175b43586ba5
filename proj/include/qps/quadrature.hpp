#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "qps/errors.hpp"

namespace qps {

namespace detail {

/// Compensated (Kahan) accumulator; keeps long cumulative sums accurate.
template <class T>
struct KahanSum {
  T sum{};
  T comp{};

  void add(T term) {
    const T y = term - comp;
    const T t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

}  // namespace detail

/// Result of a resolution-doubling trapezoid integration.
struct QuadratureResult {
  std::complex<double> value{};
  double last_delta = 0.0;  ///< |change| at the final doubling
  bool converged = false;
};

/// Composite trapezoid over [a, b], doubling the panel count until two
/// successive results differ by less than tol (absolute). Starts from
/// initial_panels and gives up after max_doublings.
template <class F>
QuadratureResult integrate_doubling(F&& f, double a, double b, double tol = 1e-8,
                                    std::size_t initial_panels = 4096,
                                    std::size_t max_doublings = 9) {
  const double length = b - a;
  std::size_t panels = initial_panels;
  double h = length / static_cast<double>(panels);

  detail::KahanSum<std::complex<double>> interior;
  for (std::size_t i = 1; i < panels; ++i) interior.add(f(a + h * static_cast<double>(i)));
  std::complex<double> estimate = h * (0.5 * (f(a) + f(b)) + interior.sum);

  QuadratureResult out;
  out.value = estimate;
  for (std::size_t level = 0; level < max_doublings; ++level) {
    // refine: previous nodes are reused, only panel midpoints are new
    detail::KahanSum<std::complex<double>> mids;
    for (std::size_t i = 0; i < panels; ++i) mids.add(f(a + h * (static_cast<double>(i) + 0.5)));
    panels *= 2;
    h *= 0.5;
    const std::complex<double> refined = 0.5 * estimate + h * mids.sum;
    out.last_delta = std::abs(refined - estimate);
    estimate = refined;
    out.value = estimate;
    if (out.last_delta < tol) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

/// Running integral of f over [0, t_end], sampled at n_out uniform nodes
/// (node 0 is exactly 0). The integrand is evaluated on a grid refine times
/// finer than the output grid; evaluation streams, so memory stays O(n_out).
template <class F>
std::vector<double> cumulative_trapezoid(F&& f, double t_end, std::size_t n_out,
                                         std::size_t refine = 1) {
  std::vector<double> out(n_out, 0.0);
  const std::size_t steps = (n_out - 1) * refine;
  const double h = t_end / static_cast<double>(steps);
  detail::KahanSum<double> acc;
  double f_prev = f(0.0);
  std::size_t next = 1;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double fk = f(h * static_cast<double>(k));
    acc.add(0.5 * h * (f_prev + fk));
    f_prev = fk;
    if (k % refine == 0) out[next++] = acc.sum;
  }
  return out;
}

/// Cumulative trapezoid with a step-halving convergence gate: the internal
/// resolution is doubled until no output sample moves by more than rel_tol,
/// judged against max(|sample|, 0.01 * series max) so zero crossings of
/// oscillatory integrands do not force unbounded refinement.
template <class F>
std::vector<double> cumulative_trapezoid_refining(F&& f, double t_end, std::size_t n_out,
                                                  double rel_tol = 1e-6,
                                                  std::size_t max_refine_log2 = 17) {
  std::vector<double> coarse = cumulative_trapezoid(f, t_end, n_out, 1);
  std::size_t refine = 2;
  for (std::size_t level = 0; level <= max_refine_log2; ++level, refine *= 2) {
    std::vector<double> fine = cumulative_trapezoid(f, t_end, n_out, refine);
    double max_abs = 0.0;
    for (double v : fine) max_abs = std::max(max_abs, std::abs(v));
    if (max_abs == 0.0) return fine;  // identically zero integrand
    bool ok = true;
    for (std::size_t i = 1; i < n_out; ++i) {
      const double scale = std::max(std::abs(fine[i]), 0.01 * max_abs);
      if (std::abs(fine[i] - coarse[i]) > rel_tol * scale) {
        ok = false;
        break;
      }
    }
    if (ok) return fine;
    coarse = std::move(fine);
  }
  throw QuadratureNotConverged("cumulative trapezoid gate not met within refinement budget");
}

}  // namespace qps
