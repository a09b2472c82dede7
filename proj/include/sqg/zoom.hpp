#pragma once

// The zoom construction behind the pointwise Holder argument: a sequence of
// rescaled, recentred views
//
//   F_0(y, s) = theta(x + y + x_0(s), t + s),
//   F_k(y, s) = mu^{2 alpha - 1} F_{k-1}(mu y + mu^{2 alpha} x_k(s), mu^{2 alpha} s),
//
// where each recentring path solves
//
//   dx_k/ds = mean over [-4 mu, 4 mu]^2 + mu^{2 alpha} x_k(s) of
//             u_{k-1}(., mu^{2 alpha} s),     x_k(0) = 0
//
// (for k = 0 the box is [-4, 4]^2 + x_0(s) and the velocity is u itself).
// Unrolled, F_k(y, s) = mu^{(2 alpha - 1) k} theta(x + mu^k y + R_k(s),
// t + mu^{2 alpha k} s) with R_k(s) = mu^{2 alpha + k - 1} x_k(s)
// + R_{k-1}(mu^{2 alpha} s) and R_0 = x_0. The level-k view is extended to
// the upper half space (F_k^* at height z samples theta^* at height mu^k z)
// and its oscillation is measured over the forward space-time boxes
// Q_r^* = [-r, r]^2 x [0, r]_z x [0, r]_s for r = 1 and r = 4. Diminishing
// oscillation shows up as a per-level contraction factor
// osc_{Q_1^*} / osc_{Q_4^*} staying below 1.

#include <array>
#include <vector>

#include "sqg/diagnostics.hpp"
#include "sqg/solver.hpp"

namespace sqg {

struct ZoomConfig {
  double mu = 0.25;        // in (0, 1]; 1 gives the identity sequence
  int levels = 4;          // zoom levels after level 0
  double ball_radius = 4.0;  // recentring box half-width at level 0
  double ode_dt = 0.02;    // RK4 step for the recentring paths
  int samples_y = 13;      // oscillation samples per horizontal axis
  int samples_z = 5;       // heights in [0, r], z = 0 included
  int samples_s = 5;       // times in [0, r]
  double degenerate_tol = 1e-12;  // osc(Q_4^*) below tol * max(1, sup)

  void validate() const;
};

struct ZoomLevel {
  int k = 0;
  double osc_q1 = 0.0;
  double osc_q4 = 0.0;
  double contraction = 0.0;  // osc_q1 / osc_q4
  // theta_bar_k^* = normalization_scale * (F_k^* - normalization_shift),
  // which has oscillation exactly 4 over Q_4^*.
  double normalization_scale = 0.0;
  double normalization_shift = 0.0;
  double max_recenter = 0.0;  // sup_{s in [0, 4]} |x_k(s)|
};

struct ZoomSequence {
  ZoomConfig config;
  std::array<double, 2> center{0.0, 0.0};
  double t_base = 0.0;
  std::vector<ZoomLevel> levels;
  bool degenerate_termination = false;  // stopped on vanishing oscillation
  // Window-containment guard 4 mu + C mu^{2 alpha} < 1 with the measured
  // C = max over levels >= 1 of sup |x_k|.
  double guard_value = 0.0;
  bool guard_satisfied = false;
};

/// Runs the zoom at (center, t_base). The trajectory must cover
/// [t_base, t_base + 4]. Recentring paths are solved level by level (each
/// level's velocity averages unroll to box averages of the stored solution),
/// then each level's extended view is sampled over Q_1^* and Q_4^*.
ZoomSequence zoom_sequence(const TrajectoryStore& traj,
                           const std::array<double, 2>& center, double t_base,
                           const ZoomConfig& cfg);

}  // namespace sqg
