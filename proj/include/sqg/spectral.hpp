#pragma once

// Spectral operators on torus fields: transforms, the fractional Laplacian
// multiplier |k|^{2 alpha}, the divergence-free velocity law, Sobolev
// seminorms, and 2/3-rule dealiasing.
//
// Conventions, fixed across the library:
//  - forward_transform returns coefficients with the 1/N^2 normalization, so
//    a constant field c maps to a single zero-mode coefficient c;
//  - zero modes of derivative-like outputs are zeroed exactly;
//  - the Nyquist row/column is zeroed in first-derivative multipliers (it has
//    no well-defined sign) but kept in the symmetric |k|^{2 alpha} multiplier.

#include <array>
#include <functional>
#include <memory>

#include "sqg/field.hpp"

namespace sqg {

/// Forward DFT. Rejects non-finite input.
SpectralField forward_transform(const PhysicalField& f);

/// Inverse DFT (exact inverse of forward_transform up to roundoff).
PhysicalField inverse_transform(const SpectralField& f);

/// (-Delta)^alpha theta via the |k_phys|^{2 alpha} multiplier, alpha in (0, 1].
SpectralField fractional_laplacian(const SpectralField& theta, double alpha);

/// First derivative along axis (0 or 1): i k multiplier, Nyquist zeroed.
SpectralField derivative(const SpectralField& theta, int axis);

/// Homogeneous Sobolev seminorm || Lambda^alpha theta ||_{L2}, alpha in [0, 1].
/// The zero mode never contributes.
double sobolev_seminorm(const SpectralField& theta, double alpha);

/// 2/3-rule dealiasing: zero every coefficient with any |k_i| > N/3.
/// Idempotent.
SpectralField dealias(const SpectralField& theta);

/// User-supplied divergence-free velocity multiplier m(k): u_hat = m(k) theta_hat.
/// Construction validates k . m(k) = 0 on every mode of the grid.
class MultiplierTable {
 public:
  using Generator = std::function<std::array<cplx, 2>(double kx, double ky)>;
  MultiplierTable(const Grid& g, const Generator& gen);

  const Grid& grid() const { return grid_; }
  std::array<cplx, 2> at(int i, int j) const { return {m1_[idx(i, j)], m2_[idx(i, j)]}; }

 private:
  size_t idx(int i, int j) const { return static_cast<size_t>(i) * grid_.n + j; }
  Grid grid_;
  std::vector<cplx> m1_, m2_;
};

enum class VelocityLaw { sqg, custom };

/// Velocity from the scalar. The sqg law is
///   u = (-d2, d1) (-Delta)^{-1/2} theta,
/// i.e. u_hat = i (-k2, k1) / |k| theta_hat, zero mode zeroed, Nyquist zeroed.
/// The custom law applies the supplied multiplier table.
VelocityField riesz_velocity(const SpectralField& theta,
                             VelocityLaw law = VelocityLaw::sqg,
                             const MultiplierTable* table = nullptr);

/// Same velocity, left in spectral space ({u1_hat, u2_hat}). Useful when only
/// point values or box averages are needed.
std::array<SpectralField, 2> riesz_velocity_spectrum(
    const SpectralField& theta, VelocityLaw law = VelocityLaw::sqg,
    const MultiplierTable* table = nullptr);

/// Spectral (trigonometric) evaluation of a real field at an arbitrary
/// point. Exact for dealiased fields; O(number of retained modes).
double evaluate_at(const SpectralField& theta, double x, double y);

/// Mean of theta over the axis-aligned box [cx-h, cx+h] x [cy-h, cy+h]
/// (periodic wrap), computed exactly in spectral space via the box filter.
double box_average(const SpectralField& theta, double cx, double cy, double h);

}  // namespace sqg
