#include <cmath>
#include <numbers>

#include "doctest.h"
#include "sqg/extension.hpp"
#include "sqg/spectral.hpp"
#include "sqg/tolerances.hpp"

using namespace sqg;

namespace {

constexpr double kPi = std::numbers::pi;

PhysicalField plane_wave(const Grid& g, int kx, int ky) {
  PhysicalField f(g);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      f.at(i, j) = std::cos(kx * g.coord(i) + ky * g.coord(j));
  return f;
}

}  // namespace

TEST_CASE("modified Bessel K at nu = 1/2 matches the elementary closed form") {
  for (double x : {0.05, 0.3, 1.0, 4.0, 20.0}) {
    const double exact = std::sqrt(kPi / (2.0 * x)) * std::exp(-x);
    CHECK(std::abs(modified_bessel_k(0.5, x) - exact) / exact <
          tol::kBesselClosedFormRel);
  }
}

TEST_CASE("extension multiplier at alpha = 1/2 is the Poisson profile e^{-s}") {
  // 2^{1/2} / Gamma(1/2) s^{1/2} K_{1/2}(s) = e^{-s}.
  for (double s : {0.01, 0.2, 1.0, 3.0, 10.0}) {
    CHECK(std::abs(extension_multiplier_bessel(0.5, s) - std::exp(-s)) <
          tol::kBesselClosedFormRel);
  }
  CHECK(extension_multiplier_bessel(0.5, 0.0) == 1.0);
  CHECK(extension_multiplier_bessel(0.5, 700.0) == 0.0);  // underflow clamp
}

TEST_CASE("multiplier properties: phi(0) = 1, monotone decay to zero") {
  for (double alpha : {0.25, 0.4, 0.5, 0.75}) {
    CHECK(extension_multiplier_bessel(alpha, 0.0) == 1.0);
    double prev = 1.0;
    for (double s = 0.25; s < 12.0; s += 0.25) {
      const double v = extension_multiplier_bessel(alpha, s);
      CHECK(v > 0.0);
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("Bessel and kernel-quadrature multiplier routes agree") {
  for (double alpha : {0.25, 0.4, 0.5, 0.75}) {
    for (double s : {0.1, 0.5, 1.0, 2.0, 5.0}) {
      const double a = extension_multiplier_bessel(alpha, s);
      const double b = extension_multiplier_quadrature(alpha, s);
      CHECK(std::abs(a - b) < tol::kMethodAgreementAbs);
    }
  }
}

TEST_CASE("extension of a plane wave is the multiplier times the wave per layer") {
  const Grid g(32, 2.0 * kPi);
  const double alpha = 0.4;
  ExtensionConfig cfg = default_extension_config(g, alpha);
  const PhysicalField f = plane_wave(g, 2, 1);
  const ExtensionField ext = extend(f, cfg);
  const double knorm = std::sqrt(5.0);
  for (int layer : {0, 5, 20}) {
    const double phi = extension_multiplier_bessel(alpha, knorm * ext.z[layer]);
    for (int i = 0; i < g.n; i += 7)
      for (int j = 0; j < g.n; j += 5)
        CHECK(ext.layer[layer].at(i, j) ==
              doctest::Approx(phi * f.at(i, j)).epsilon(1e-10));
  }
}

TEST_CASE("extension satisfies the maximum principle layer by layer") {
  const Grid g(32, 2.0 * kPi);
  const PhysicalField f = random_band_limited(g, 6, 1.0, 17);
  const ExtensionField ext = extend(f, default_extension_config(g, 0.35));
  const double lo = *std::min_element(f.values.begin(), f.values.end());
  const double hi = *std::max_element(f.values.begin(), f.values.end());
  for (const PhysicalField& layer : ext.layer)
    for (double v : layer.values) {
      CHECK(v >= lo - 1e-12);
      CHECK(v <= hi + 1e-12);
    }
}

TEST_CASE("normal derivative limit recovers the fractional Laplacian") {
  const Grid g(64, 2.0 * kPi);
  for (double alpha : {0.25, 0.4, 0.5}) {
    const ExtensionConfig cfg = default_extension_config(g, alpha);
    const double d_alpha = calibrate_normal_derivative(g, cfg);
    CHECK(d_alpha > 0.0);

    const PhysicalField f = random_band_limited(g, g.n / 3, 1.0, 23);
    const SpectralField hat = forward_transform(f);
    const PhysicalField nd = normal_derivative_limit(extend(hat, cfg), d_alpha);
    const PhysicalField frac = inverse_transform(fractional_laplacian(hat, alpha));
    double num = 0.0, den = 0.0;
    for (int i = 0; i < g.size(); ++i) {
      num = std::max(num, std::abs(nd.values[i] - frac.values[i]));
      den = std::max(den, std::abs(frac.values[i]));
    }
    CHECK(num / den < tol::kNormalDerivativeRel);
  }
}

TEST_CASE("extension value at arbitrary points matches the layer fields on nodes") {
  const Grid g(32, 2.0 * kPi);
  const double alpha = 0.5;
  const PhysicalField f = random_band_limited(g, 5, 1.0, 31);
  const SpectralField hat = forward_transform(f);
  const ExtensionField ext = extend(hat, default_extension_config(g, alpha));
  for (int layer : {0, 8, 25})
    for (int i : {0, 11})
      for (int j : {4, 19})
        CHECK(extension_value_at(hat, alpha, g.coord(i), g.coord(j),
                                 ext.z[layer]) ==
              doctest::Approx(ext.layer[layer].at(i, j)).epsilon(1e-10));
}

TEST_CASE("weighted Dirichlet energy reproduces the Sobolev seminorm") {
  // int z^b |grad theta*|^2 over the slab equals d_alpha-normalized
  // ||theta||_{H^alpha}^2; checked on a fine geometric grid against the
  // calibrated constant.
  const Grid g(32, 2.0 * kPi);
  const double alpha = 0.5;
  ExtensionConfig cfg;
  cfg.alpha = alpha;
  cfg.z_min = 1e-4;
  cfg.rho = 1.03;
  cfg.levels = 430;
  const double d_alpha = calibrate_normal_derivative(g, cfg);

  const PhysicalField f = random_band_limited(g, 4, 1.0, 13);
  const SpectralField hat = forward_transform(f);
  const double energy = weighted_dirichlet_energy(extend(hat, cfg));
  const double semi = sobolev_seminorm(hat, alpha);
  CHECK(std::abs(energy - d_alpha * semi * semi) / (d_alpha * semi * semi) <
        tol::kExtensionEnergyRel);
}

TEST_CASE("extension config validation") {
  ExtensionConfig cfg = default_extension_config(Grid(32, 2.0 * kPi), 0.5);
  CHECK_NOTHROW(cfg.validate());
  ExtensionConfig bad = cfg;
  bad.rho = 0.9;
  CHECK_THROWS(bad.validate());
  bad = cfg;
  bad.alpha = 1.0;  // b = -1 falls outside the weight class
  CHECK_THROWS(bad.validate());
  bad = cfg;
  bad.z_min = 0.0;
  CHECK_THROWS(bad.validate());
  CHECK(cfg.nodes().front() == 0.0);
  CHECK(cfg.nodes().size() == size_t(cfg.levels) + 2);
}
