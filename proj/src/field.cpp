#include "sqg/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "sqg/spectral.hpp"

namespace sqg {

Grid::Grid(int n_points_per_axis, double domain_length)
    : n(n_points_per_axis), length(domain_length) {
  if (n < 8 || n % 2 != 0)
    throw std::invalid_argument("Grid: n_points_per_axis must be even and >= 8");
  if (!(length > 0.0))
    throw std::invalid_argument("Grid: domain_length must be positive");
}

double Grid::wavenumber_unit() const { return 2.0 * std::numbers::pi / length; }

double l2_norm(const PhysicalField& f) {
  double s = 0.0;
  for (double v : f.values) s += v * v;
  return std::sqrt(s * f.grid.cell_area());
}

double sup_norm(const PhysicalField& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

double mean(const PhysicalField& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s / f.grid.size();
}

double l2_norm(const SpectralField& f) {
  double s = 0.0;
  for (const cplx& c : f.coeff) s += std::norm(c);
  return f.grid.length * std::sqrt(s);
}

bool all_finite(const PhysicalField& f) {
  return std::all_of(f.values.begin(), f.values.end(),
                     [](double v) { return std::isfinite(v); });
}

bool all_finite(const SpectralField& f) {
  return std::all_of(f.coeff.begin(), f.coeff.end(), [](const cplx& c) {
    return std::isfinite(c.real()) && std::isfinite(c.imag());
  });
}

double hermitian_defect(const SpectralField& f) {
  const int n = f.grid.n;
  double scale = 0.0;
  for (const cplx& c : f.coeff) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const int im = (n - i) % n;
    for (int j = 0; j < n; ++j) {
      const int jm = (n - j) % n;
      worst = std::max(worst, std::abs(f.at(i, j) - std::conj(f.at(im, jm))));
    }
  }
  return worst / scale;
}

PhysicalField random_band_limited(const Grid& g, int band, double amplitude,
                                  unsigned long long seed) {
  if (band < 1 || band > g.n / 3)
    throw std::invalid_argument("random_band_limited: band must lie in [1, N/3]");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SpectralField hat(g);
  // Fill half the mode box in a fixed order and mirror; the loop covers
  // kx > 0, plus kx = 0 with ky > 0, which parameterizes the independent
  // coefficients of a zero-mean real field.
  for (int kx = 0; kx <= band; ++kx) {
    for (int ky = -band; ky <= band; ++ky) {
      if (kx == 0 && ky <= 0) continue;
      const cplx c(gauss(rng), gauss(rng));
      hat.mode(kx, ky) = c;
      hat.mode(-kx, -ky) = std::conj(c);
    }
  }
  PhysicalField out = inverse_transform(hat);
  const double s = sup_norm(out);
  if (s > 0.0)
    for (double& v : out.values) v *= amplitude / s;
  return out;
}

}  // namespace sqg
