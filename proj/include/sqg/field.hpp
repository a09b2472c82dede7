#pragma once

// Scalar fields on the 2-D periodic torus [0, L)^2: real grid samples and
// their Fourier coefficients, plus the small amount of norm/quadrature
// bookkeeping everything else leans on.

#include <complex>
#include <cstddef>
#include <vector>

namespace sqg {

using cplx = std::complex<double>;

/// Uniform N x N sampling of the torus [0, L)^2. N must be even and >= 8;
/// the simulation dimension is fixed at 2.
struct Grid {
  int n = 0;
  double length = 0.0;

  Grid() = default;
  Grid(int n_points_per_axis, double domain_length);

  int size() const { return n * n; }
  double spacing() const { return length / n; }
  double cell_area() const { return spacing() * spacing(); }

  /// Physical coordinate of grid node index i along one axis.
  double coord(int i) const { return spacing() * i; }

  /// Signed integer mode for storage index i: 0..N/2, then negative.
  int mode_of(int i) const { return i <= n / 2 ? i : i - n; }

  /// Storage index of a signed integer mode (wraps mod N).
  int index_of(int mode) const { return (mode % n + n) % n; }

  /// Converts integer modes to physical wavenumbers: k_phys = (2 pi / L) k.
  double wavenumber_unit() const;

  bool operator==(const Grid&) const = default;
};

/// Real samples theta(x_i, y_j), row-major: values[i * n + j].
struct PhysicalField {
  Grid grid;
  std::vector<double> values;

  PhysicalField() = default;
  explicit PhysicalField(const Grid& g) : grid(g), values(g.size(), 0.0) {}

  double& at(int i, int j) { return values[static_cast<size_t>(i) * grid.n + j]; }
  double at(int i, int j) const { return values[static_cast<size_t>(i) * grid.n + j]; }
};

/// Fourier coefficients theta_hat(k) with the convention
///   theta(x) = sum_k theta_hat(k) exp(i k_phys . x),
/// stored over the full N x N mode box (Hermitian symmetry holds for real
/// fields and is preserved by every operation in this library).
struct SpectralField {
  Grid grid;
  std::vector<cplx> coeff;

  SpectralField() = default;
  explicit SpectralField(const Grid& g) : grid(g), coeff(g.size(), cplx{}) {}

  cplx& at(int i, int j) { return coeff[static_cast<size_t>(i) * grid.n + j]; }
  cplx at(int i, int j) const { return coeff[static_cast<size_t>(i) * grid.n + j]; }

  /// Coefficient of the signed integer mode (kx, ky).
  cplx& mode(int kx, int ky) { return at(grid.index_of(kx), grid.index_of(ky)); }
  cplx mode(int kx, int ky) const { return at(grid.index_of(kx), grid.index_of(ky)); }
};

/// Divergence-free velocity sampled on the same grid as the scalar.
struct VelocityField {
  PhysicalField u1;
  PhysicalField u2;

  VelocityField() = default;
  explicit VelocityField(const Grid& g) : u1(g), u2(g) {}
  const Grid& grid() const { return u1.grid; }
};

// Norms and reductions. Physical-space integrals are plain grid quadrature
// (exact for band-limited integrands); spectral L2 uses Parseval.
double l2_norm(const PhysicalField& f);
double sup_norm(const PhysicalField& f);
double mean(const PhysicalField& f);
double l2_norm(const SpectralField& f);
bool all_finite(const PhysicalField& f);
bool all_finite(const SpectralField& f);

/// Max relative deviation from Hermitian symmetry, scaled by the largest
/// coefficient magnitude. Zero for the spectrum of any real field.
double hermitian_defect(const SpectralField& f);

/// Zero-mean random field with Gaussian coefficients on the integer-mode
/// band 1 <= |k|_inf <= band, Hermitian-symmetrized, deterministic in seed.
/// Amplitude scales the result so that sup |theta| is O(amplitude).
PhysicalField random_band_limited(const Grid& g, int band, double amplitude,
                                  unsigned long long seed);

}  // namespace sqg
