#include <cmath>
#include <memory>
#include <numbers>

#include "doctest.h"
#include "sqg/solver.hpp"
#include "sqg/spectral.hpp"
#include "sqg/zoom.hpp"

using namespace sqg;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<MultiplierTable> zero_velocity_table(const Grid& g) {
  return std::make_shared<MultiplierTable>(g, [](double, double) {
    return std::array<cplx, 2>{cplx{0.0, 0.0}, cplx{0.0, 0.0}};
  });
}

TrajectoryStore diffusion_run_to(double t_end, const PhysicalField& theta0) {
  SimConfig cfg;
  cfg.grid = theta0.grid;
  cfg.kappa = 0.1;
  cfg.alpha = 0.5;
  cfg.dt = 0.01;
  cfg.t_end = t_end;
  cfg.snapshot_stride = 20;
  cfg.velocity_law = VelocityLaw::custom;
  cfg.custom_multiplier = zero_velocity_table(cfg.grid);
  return run_simulation(cfg, theta0);
}

ZoomConfig cheap_zoom(double mu, int levels) {
  ZoomConfig zc;
  zc.mu = mu;
  zc.levels = levels;
  zc.ode_dt = 0.1;
  zc.samples_y = 7;
  zc.samples_z = 3;
  zc.samples_s = 3;
  return zc;
}

}  // namespace

TEST_CASE("zoom config validation") {
  ZoomConfig zc = cheap_zoom(0.25, 3);
  CHECK_NOTHROW(zc.validate());
  ZoomConfig bad = zc;
  bad.mu = 0.0;
  CHECK_THROWS(bad.validate());
  bad = zc;
  bad.mu = 1.5;
  CHECK_THROWS(bad.validate());
  bad = zc;
  bad.samples_y = 1;
  CHECK_THROWS(bad.validate());
  bad = zc;
  bad.ode_dt = 0.0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("zoom requires the trajectory to cover the forward time window") {
  const Grid g(32, 2.0 * kPi);
  const TrajectoryStore traj =
      diffusion_run_to(1.0, random_band_limited(g, 3, 1.0, 5));
  CHECK_THROWS(zoom_sequence(traj, {kPi, kPi}, 0.0, cheap_zoom(0.5, 2)));
}

TEST_CASE("constant fields terminate the zoom as degenerate") {
  const Grid g(32, 2.0 * kPi);
  PhysicalField flat(g);
  for (double& v : flat.values) v = 0.75;
  const TrajectoryStore traj = diffusion_run_to(4.5, flat);
  const ZoomSequence seq =
      zoom_sequence(traj, {kPi, kPi}, 0.0, cheap_zoom(0.5, 3));
  CHECK(seq.degenerate_termination);
  CHECK(seq.levels.size() < 4);
}

TEST_CASE("at mu = 1 with zero velocity every level sees the same window") {
  // The recursion reduces to the identity: no rescaling, no recentering, so
  // the oscillation data must repeat exactly across levels.
  const Grid g(32, 2.0 * kPi);
  const TrajectoryStore traj =
      diffusion_run_to(4.5, random_band_limited(g, 3, 1.0, 9));
  const ZoomSequence seq =
      zoom_sequence(traj, {kPi, kPi}, 0.2, cheap_zoom(1.0, 3));
  REQUIRE(seq.levels.size() == 4);
  for (const ZoomLevel& lev : seq.levels) {
    CHECK(lev.max_recenter == 0.0);
    CHECK(lev.osc_q4 == doctest::Approx(seq.levels[0].osc_q4).epsilon(1e-12));
    CHECK(lev.osc_q1 == doctest::Approx(seq.levels[0].osc_q1).epsilon(1e-12));
    CHECK(lev.normalization_scale * lev.osc_q4 == doctest::Approx(4.0));
  }
  CHECK_FALSE(seq.guard_satisfied);  // 4 mu >= 1 at mu = 1
}

TEST_CASE("smooth diffusing fields contract under zooming") {
  const Grid g(32, 2.0 * kPi);
  const TrajectoryStore traj =
      diffusion_run_to(4.5, random_band_limited(g, 3, 1.0, 13));
  const ZoomSequence seq =
      zoom_sequence(traj, {kPi, kPi}, 0.2, cheap_zoom(0.2, 4));
  REQUIRE(seq.levels.size() >= 4);
  int contracting = 0;
  for (const ZoomLevel& lev : seq.levels) {
    CHECK(lev.osc_q4 > 0.0);
    CHECK(lev.contraction > 0.0);
    if (lev.contraction < 1.0) ++contracting;
  }
  CHECK(contracting >= 3);
  CHECK(seq.guard_satisfied);  // zero recentering: guard = 4 mu = 0.8 < 1
  CHECK(seq.guard_value == doctest::Approx(0.8));
}
