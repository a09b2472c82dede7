#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "sqg/field.hpp"
#include "sqg/spectral.hpp"
#include "sqg/tolerances.hpp"

using namespace sqg;

namespace {

constexpr double kPi = std::numbers::pi;

// Direct O(N^4) double-sum oracle for the fractional Laplacian: transform by
// explicit summation, multiply by |k_phys|^{2 alpha}, sum back.
PhysicalField fractional_laplacian_direct(const PhysicalField& f, double alpha) {
  const Grid& g = f.grid;
  const int n = g.n;
  const double ku = g.wavenumber_unit();
  std::vector<std::complex<double>> hat(g.size());
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      std::complex<double> s{0.0, 0.0};
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double phase =
              -2.0 * kPi * (double(g.mode_of(a)) * i + double(g.mode_of(b)) * j) / n;
          s += f.at(i, j) * std::polar(1.0, phase);
        }
      hat[a * n + b] = s / double(n * n);
    }
  PhysicalField out(g);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::complex<double> s{0.0, 0.0};
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          const double kx = ku * g.mode_of(a), ky = ku * g.mode_of(b);
          const double mult = std::pow(kx * kx + ky * ky, alpha);
          const double phase =
              2.0 * kPi * (double(g.mode_of(a)) * i + double(g.mode_of(b)) * j) / n;
          s += mult * hat[a * n + b] * std::polar(1.0, phase);
        }
      out.at(i, j) = s.real();
    }
  return out;
}

double rel_sup_diff(const PhysicalField& a, const PhysicalField& b) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i) {
    num = std::max(num, std::abs(a.values[i] - b.values[i]));
    den = std::max(den, std::abs(b.values[i]));
  }
  return num / std::max(den, 1e-300);
}

}  // namespace

TEST_CASE("forward/inverse transform round trip is exact to roundoff") {
  const Grid g(32, 2.0 * kPi);
  const PhysicalField f = random_band_limited(g, 10, 1.0, 11);
  const PhysicalField back = inverse_transform(forward_transform(f));
  CHECK(rel_sup_diff(back, f) < tol::kRoundTripRel);
}

TEST_CASE("constant field maps to a single zero-mode coefficient") {
  const Grid g(16, 1.0);
  PhysicalField f(g);
  for (double& v : f.values) v = 3.25;
  const SpectralField hat = forward_transform(f);
  CHECK(hat.mode(0, 0).real() == doctest::Approx(3.25).epsilon(1e-14));
  double off = 0.0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      if (i != 0 || j != 0) off = std::max(off, std::abs(hat.at(i, j)));
  CHECK(off < 1e-14);
}

TEST_CASE("fractional Laplacian matches the direct DFT double-sum oracle") {
  const Grid g(32, 2.0 * kPi);
  for (double alpha : {0.2, 0.3, 0.5, 1.0}) {
    for (unsigned seed : {1u, 2u}) {
      const PhysicalField f = random_band_limited(g, 10, 1.0, seed);
      const PhysicalField fast =
          inverse_transform(fractional_laplacian(forward_transform(f), alpha));
      const PhysicalField slow = fractional_laplacian_direct(f, alpha);
      CHECK(rel_sup_diff(fast, slow) < tol::kSpectralOracleRel);
    }
  }
}

TEST_CASE("fractional Laplacian at alpha = 1 equals minus the Laplacian of a mode") {
  const Grid g(32, 2.0 * kPi);
  PhysicalField f(g);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      f.at(i, j) = std::cos(3.0 * g.coord(i)) * std::sin(2.0 * g.coord(j));
  const PhysicalField lap =
      inverse_transform(fractional_laplacian(forward_transform(f), 1.0));
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      CHECK(lap.at(i, j) == doctest::Approx(13.0 * f.at(i, j)).epsilon(1e-11));
}

TEST_CASE("Parseval: physical and spectral L2 norms agree") {
  const Grid g(64, 2.0 * kPi);
  const PhysicalField f = random_band_limited(g, 20, 2.0, 5);
  const double phys = l2_norm(f);
  const double spec = l2_norm(forward_transform(f));
  CHECK(std::abs(phys - spec) / phys < tol::kParsevalRel);
}

TEST_CASE("derivative is exact on trigonometric modes and kills the zero mode") {
  const Grid g(32, 2.0 * kPi);
  PhysicalField f(g);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      f.at(i, j) = 1.5 + std::sin(4.0 * g.coord(i)) * std::cos(g.coord(j));
  const PhysicalField dx = inverse_transform(derivative(forward_transform(f), 0));
  const PhysicalField dy = inverse_transform(derivative(forward_transform(f), 1));
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const double ex_dx = 4.0 * std::cos(4.0 * g.coord(i)) * std::cos(g.coord(j));
      const double ex_dy = -std::sin(4.0 * g.coord(i)) * std::sin(g.coord(j));
      CHECK(dx.at(i, j) == doctest::Approx(ex_dx).epsilon(1e-11));
      CHECK(dy.at(i, j) == doctest::Approx(ex_dy).epsilon(1e-11));
    }
  CHECK(std::abs(mean(dx)) < 1e-13);
}

TEST_CASE("dealiasing zeroes exactly the modes above N/3 and is idempotent") {
  const Grid g(30, 2.0 * kPi);
  SpectralField hat(g);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) hat.at(i, j) = cplx{1.0, -1.0};
  const SpectralField cut = dealias(hat);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const bool keep =
          std::abs(g.mode_of(i)) <= g.n / 3 && std::abs(g.mode_of(j)) <= g.n / 3;
      CHECK(std::abs(cut.at(i, j)) == (keep ? doctest::Approx(std::sqrt(2.0))
                                            : doctest::Approx(0.0)));
    }
  const SpectralField twice = dealias(cut);
  for (int i = 0; i < g.size(); ++i) CHECK(twice.coeff[i] == cut.coeff[i]);
}

TEST_CASE("sqg velocity law on a plane wave matches the closed form") {
  // theta = cos(k . x) with k_phys = (3, -2):
  //   u_hat = i (-k2, k1)/|k| theta_hat, so
  //   u = (k2, -k1)/|k| sin(k . x).
  const Grid g(32, 2.0 * kPi);
  PhysicalField f(g);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      f.at(i, j) = std::cos(3.0 * g.coord(i) - 2.0 * g.coord(j));
  const VelocityField u = riesz_velocity(forward_transform(f));
  const double norm = std::sqrt(13.0);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const double s = std::sin(3.0 * g.coord(i) - 2.0 * g.coord(j));
      CHECK(u.u1.at(i, j) == doctest::Approx(-2.0 / norm * s).epsilon(1e-11));
      CHECK(u.u2.at(i, j) == doctest::Approx(-3.0 / norm * s).epsilon(1e-11));
    }
}

TEST_CASE("sqg velocity is divergence free in spectral space") {
  const Grid g(32, 2.0 * kPi);
  const PhysicalField f = random_band_limited(g, 10, 1.0, 3);
  const auto uh = riesz_velocity_spectrum(forward_transform(f));
  const SpectralField d1 = derivative(uh[0], 0);
  const SpectralField d2 = derivative(uh[1], 1);
  double div = 0.0;
  for (int i = 0; i < g.size(); ++i)
    div = std::max(div, std::abs(d1.coeff[i] + d2.coeff[i]));
  CHECK(div < 1e-12);
}

TEST_CASE("multiplier table construction rejects non-divergence-free laws") {
  const Grid g(16, 2.0 * kPi);
  CHECK_THROWS(MultiplierTable(g, [](double kx, double ky) {
    return std::array<cplx, 2>{cplx{kx, 0.0}, cplx{ky, 0.0}};
  }));
  CHECK_NOTHROW(MultiplierTable(g, [](double kx, double ky) {
    return std::array<cplx, 2>{cplx{-ky, 0.0}, cplx{kx, 0.0}};
  }));
  CHECK_NOTHROW(MultiplierTable(g, [](double, double) {
    return std::array<cplx, 2>{cplx{0.0, 0.0}, cplx{0.0, 0.0}};
  }));
}

TEST_CASE("evaluate_at reproduces grid values and the plane-wave closed form") {
  const Grid g(32, 2.0 * kPi);
  const PhysicalField f = random_band_limited(g, 8, 1.0, 9);
  const SpectralField hat = forward_transform(f);
  for (int i : {0, 5, 17})
    for (int j : {3, 20, 31})
      CHECK(evaluate_at(hat, g.coord(i), g.coord(j)) ==
            doctest::Approx(f.at(i, j)).epsilon(1e-11));

  SpectralField wave(g);
  wave.mode(2, -1) = cplx{0.5, 0.0};
  wave.mode(-2, 1) = cplx{0.5, 0.0};
  CHECK(evaluate_at(wave, 0.3, 1.7) ==
        doctest::Approx(std::cos(2.0 * 0.3 - 1.7)).epsilon(1e-12));
}

TEST_CASE("box average matches the separable sinc closed form") {
  const Grid g(32, 2.0 * kPi);
  PhysicalField f(g);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      f.at(i, j) = std::cos(3.0 * g.coord(i)) * std::cos(2.0 * g.coord(j));
  const SpectralField hat = forward_transform(f);
  const double cx = 1.1, cy = 0.4, h = 0.37;
  const double exact = std::cos(3.0 * cx) * (std::sin(3.0 * h) / (3.0 * h)) *
                       std::cos(2.0 * cy) * (std::sin(2.0 * h) / (2.0 * h));
  CHECK(box_average(hat, cx, cy, h) == doctest::Approx(exact).epsilon(1e-12));
  // A box of half-width pi covers the whole torus: the mean, i.e. zero here.
  CHECK(std::abs(box_average(hat, cx, cy, kPi)) < 1e-13);
}

TEST_CASE("sobolev seminorm matches the explicit mode sum") {
  const Grid g(16, 2.0 * kPi);
  SpectralField hat(g);
  hat.mode(1, 0) = cplx{0.5, 0.0};
  hat.mode(-1, 0) = cplx{0.5, 0.0};
  hat.mode(2, 2) = cplx{0.0, 0.25};
  hat.mode(-2, -2) = cplx{0.0, -0.25};
  const double alpha = 0.4;
  const double expected =
      g.length * std::sqrt(2.0 * 0.25 * std::pow(1.0, 2.0 * alpha) +
                           2.0 * 0.0625 * std::pow(8.0, alpha));
  CHECK(sobolev_seminorm(hat, alpha) == doctest::Approx(expected).epsilon(1e-13));
}
