#include <cmath>
#include <limits>

#include "doctest.h"
#include "sqg/boxfield.hpp"
#include "sqg/tolerances.hpp"

using namespace sqg;

namespace {

BoxField linear_in_z(const BoxSpec& spec, int nx, int nz, double a, double c) {
  return sample_box(spec, nx, nz,
                    [a, c](std::array<double, 2>, double z) { return a * z + c; });
}

}  // namespace

TEST_CASE("weighted set measures partition the box exactly") {
  for (int n : {1, 2}) {
    BoxSpec spec;
    spec.n = n;
    spec.r = 2.0;
    const BoxField f = random_smooth_box_field(spec, n == 1 ? 200 : 40, 40, 7);
    for (double b : {0.0, 0.3, 0.5, -0.4}) {
      const WeightedSets sets = weighted_set_measures(f, b);
      CHECK(sets.a_w >= 0.0);
      CHECK(sets.b_w >= 0.0);
      CHECK(sets.c_w >= 0.0);
      CHECK(std::abs(sets.a_w + sets.b_w + sets.c_w - sets.exact_total) <
            1e-12 * sets.exact_total);
      CHECK(sets.total == doctest::Approx(sets.exact_total).epsilon(1e-12));
    }
  }
}

TEST_CASE("measures and energy are exact for profiles linear in z") {
  // f = a z + c crosses the levels inside the box; the per-cell linear
  // interface splitting and the z^b antiderivative weights make every
  // quantity exact to roundoff.
  BoxSpec spec;
  spec.n = 1;
  spec.r = 1.0;
  const double a = 2.5, c = -0.4;
  const double z0 = -c / a;          // f = 0
  const double z1 = (1.0 - c) / a;   // f = 1
  const BoxField f = linear_in_z(spec, 64, 64, a, c);
  for (double b : {0.0, 0.5}) {
    const WeightedSets sets = weighted_set_measures(f, b);
    const double width = 2.0 * spec.r;
    const double p1 = 1.0 + b;
    const double wa = width * std::pow(z0, p1) / p1;
    const double wc = width * (std::pow(z1, p1) - std::pow(z0, p1)) / p1;
    const double wb = width * (std::pow(spec.r, p1) - std::pow(z1, p1)) / p1;
    CHECK(sets.a_w == doctest::Approx(wa).epsilon(1e-12));
    CHECK(sets.b_w == doctest::Approx(wb).epsilon(1e-12));
    CHECK(sets.c_w == doctest::Approx(wc).epsilon(1e-12));
    // |grad f| = a on the whole box, so K = a^2 * total weighted volume.
    CHECK(sets.k == doctest::Approx(a * a * sets.exact_total).epsilon(1e-10));
  }
}

TEST_CASE("the r-power exponent balances the inequality under dilation") {
  // Both sides of the inequality scale identically exactly when the
  // exponent equals 2(n+1+b) - (n+1+b)/(2p) - (n+b-1)/2.
  for (int n : {1, 2})
    for (double b : {0.0, 0.3, 0.5}) {
      const double p = default_isoperimetric_p(b);
      CHECK(p > 1.0);
      const double nb = n + 1 + b;
      const double expected = 2.0 * nb - nb / (2.0 * p) - (n + b - 1.0) / 2.0;
      CHECK(isoperimetric_r_power(n, b, p) == doctest::Approx(expected));
    }
  CHECK(default_isoperimetric_p(0.5) == doctest::Approx(7.0));
}

TEST_CASE("implied isoperimetric constant is invariant across the r sweep") {
  // The same normalized profile stretched to B_1*, B_2*, B_4*: the discrete
  // measures scale exactly, so the implied constant cannot move.
  for (int n : {1, 2})
    for (double b : {0.0, 0.3, 0.5}) {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (double r : {1.0, 2.0, 4.0}) {
        BoxSpec spec;
        spec.n = n;
        spec.r = r;
        const BoxField f =
            random_smooth_box_field(spec, n == 1 ? 160 : 36, 36, 99);
        const IsoperimetricReport rep =
            isoperimetric_check(f, b, default_isoperimetric_p(b));
        REQUIRE(std::isfinite(rep.implied_constant));
        lo = std::min(lo, rep.implied_constant);
        hi = std::max(hi, rep.implied_constant);
      }
      CHECK(hi / lo - 1.0 < 1e-10);
    }
}

TEST_CASE("isoperimetric report has coherent structure") {
  BoxSpec spec;
  spec.n = 2;
  spec.r = 1.0;
  const BoxField f = random_smooth_box_field(spec, 24, 24, 5);
  const double b = 0.3;
  const IsoperimetricReport rep = isoperimetric_check(f, b, default_isoperimetric_p(b));
  CHECK(rep.lhs == doctest::Approx(rep.sets.a_w * rep.sets.b_w));
  CHECK(rep.rhs_no_constant > 0.0);
  CHECK(rep.implied_constant == doctest::Approx(rep.lhs / rep.rhs_no_constant));
}

TEST_CASE("degenerate fields produce the documented extremes") {
  BoxSpec spec;
  spec.n = 1;
  spec.r = 1.0;
  const BoxField all_low =
      sample_box(spec, 32, 32, [](std::array<double, 2>, double) { return -1.0; });
  const IsoperimetricReport rep_low = isoperimetric_check(all_low, 0.0, 7.0);
  CHECK(rep_low.implied_constant == 0.0);  // lhs vanishes with B empty

  const BoxField mid =
      sample_box(spec, 32, 32, [](std::array<double, 2>, double) { return 0.5; });
  const IsoperimetricReport rep_mid = isoperimetric_check(mid, 0.0, 7.0);
  CHECK(rep_mid.lhs == 0.0);  // A and B both empty
}

TEST_CASE("change of variables flattens the weight") {
  BoxSpec spec;
  spec.n = 1;
  spec.r = 1.0;
  const BoxField f = random_smooth_box_field(spec, 256, 256, 11);
  // b = 0 is the identity map: only roundoff survives.
  CHECK(change_of_variables_check(f, 0.0) <= 1e-14);
  CHECK(change_of_variables_check(f, 0.5) <
        tol::check_tolerance("change_of_variables"));
  CHECK(change_of_variables_check(f, 0.3) <
        tol::check_tolerance("change_of_variables"));
}

TEST_CASE("input validation") {
  BoxSpec spec;
  spec.n = 3;
  CHECK_THROWS(spec.validate());
  spec.n = 1;
  spec.r = 0.0;
  CHECK_THROWS(spec.validate());
  spec.r = 1.0;
  const BoxField f = random_smooth_box_field(spec, 16, 16, 1);
  CHECK_THROWS(weighted_set_measures(f, 1.0));   // b outside (-1, 1)
  CHECK_THROWS(weighted_set_measures(f, -1.0));
  BoxField bad = f;
  bad.values[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(weighted_set_measures(bad, 0.0));
}
