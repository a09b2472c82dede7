#pragma once

// Internal helper: integrate a sampled time series with the trapezoid rule
// plus an Euler-Maclaurin endpoint-derivative correction, giving O(h^4)
// accuracy on smooth integrands without assuming uniform spacing. Used by
// the diagnostics that quadrate energies over stored snapshot times.

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace sqg::detail {

/// Derivative at `at` of the quadratic through (ta,fa), (tb,fb), (tc,fc).
inline double lagrange_derivative(double ta, double tb, double tc, double fa,
                                  double fb, double fc, double at) {
  return fa * (2.0 * at - tb - tc) / ((ta - tb) * (ta - tc)) +
         fb * (2.0 * at - ta - tc) / ((tb - ta) * (tb - tc)) +
         fc * (2.0 * at - ta - tb) / ((tc - ta) * (tc - tb));
}

inline double integrate_series(const std::vector<double>& t,
                               const std::vector<double>& v) {
  if (t.size() != v.size()) throw std::invalid_argument("integrate_series: size mismatch");
  const size_t n = t.size();
  if (n < 2) return 0.0;
  double total = 0.0;
  for (size_t i = 0; i + 1 < n; ++i)
    total += 0.5 * (t[i + 1] - t[i]) * (v[i] + v[i + 1]);
  if (n < 3) return total;

  // Per-interval correction -h^2/12 (f'(right) - f'(left)), with slopes from
  // local three-point stencils; exact for cubics on uniform spacing.
  std::vector<double> slope(n);
  slope[0] = lagrange_derivative(t[0], t[1], t[2], v[0], v[1], v[2], t[0]);
  for (size_t j = 1; j + 1 < n; ++j)
    slope[j] = lagrange_derivative(t[j - 1], t[j], t[j + 1], v[j - 1], v[j], v[j + 1], t[j]);
  slope[n - 1] = lagrange_derivative(t[n - 3], t[n - 2], t[n - 1], v[n - 3], v[n - 2],
                                     v[n - 1], t[n - 1]);
  for (size_t i = 0; i + 1 < n; ++i) {
    const double h = t[i + 1] - t[i];
    total -= h * h / 12.0 * (slope[i + 1] - slope[i]);
  }
  return total;
}

}  // namespace sqg::detail
