#pragma once

// Pointwise regularity diagnostics on simulation output: advected centers
// (local-average recentring ODE), box oscillation profiles across dyadic
// scales, Holder exponent fits, and a sampled velocity Holder norm.

#include <array>
#include <vector>

#include "sqg/field.hpp"
#include "sqg/solver.hpp"

namespace sqg {

/// Mean of the velocity over the square box of the given half-width centered
/// at `center`, at an arbitrary time inside the stored trajectory (spectra
/// are interpolated linearly in time). Evaluated as a direct mode sum, so no
/// transform of the full field is needed.
std::array<double, 2> velocity_box_average(const TrajectoryStore& traj,
                                           double time,
                                           const std::array<double, 2>& center,
                                           double half_width);

struct PathSample {
  double s = 0.0;                     // elapsed time since t_start
  std::array<double, 2> x{0.0, 0.0};  // displacement from the base point
  std::array<double, 2> rate{0.0, 0.0};
};

/// Displacement path x0(s) with x0(0) = 0 and
///   dx0/ds = mean of u(base + ., t_start + s) over x0(s) + [-h, h]^2,
/// integrated by classical RK4 with fixed step ds.
struct AdvectedPath {
  std::vector<PathSample> samples;

  std::array<double, 2> at(double s) const;    // linear interpolation
  std::array<double, 2> rate_at(double s) const;
};

AdvectedPath advected_center(const TrajectoryStore& traj,
                             const std::array<double, 2>& base,
                             double ball_radius, double t_start, double s_end,
                             double ds);

enum class OscFrame { fixed, advected };

struct OscillationSample {
  double scale = 0.0;  // box half-width
  double osc = 0.0;    // sup - inf over the box
  double error_bar = 0.0;
  bool refined = false;  // interpolation refinement applied at this scale
};

struct OscillationProfile {
  std::vector<OscillationSample> samples;
  OscFrame frame = OscFrame::fixed;
  double mu = 0.5;
  bool truncated = false;  // requested scales cut to keep >= 4 cells per side
  int requested_scales = 0;
};

/// Oscillations of the sampled field over boxes of half-width r0 * mu^k,
/// k = 0 .. k_scales-1, centered at `center` (periodic wrap). Sup and inf
/// come from a node scan; at the two finest scales the box is re-sampled on
/// a 4x Catmull-Rom bicubic sublattice. Scales with fewer than 4 cells per
/// side are dropped and the profile marked truncated. Error bars estimate
/// the missed-extremum gap from sampled gradients.
OscillationProfile oscillation_profile(const PhysicalField& field,
                                       const std::array<double, 2>& center,
                                       double mu, int k_scales, double r0);

/// Advected-frame variant: the field is the trajectory slice at
/// t_start + s_elapsed and the center is displaced by the advected path over
/// [0, s_elapsed]. With constant velocity this reproduces the fixed-frame
/// profile of the Galilean-shifted field.
OscillationProfile oscillation_profile_advected(
    const TrajectoryStore& traj, double t_start, double s_elapsed,
    const std::array<double, 2>& center, double ball_radius, double mu,
    int k_scales, double r0);

struct HolderEstimate {
  double delta = 0.0;  // least-squares slope of log osc vs log scale
  double fit_r2 = 0.0;
  double scale_min = 0.0;
  double scale_max = 0.0;
  int points_used = 0;
  bool degenerate = false;  // fewer than 4 usable scales
};

HolderEstimate holder_fit(const OscillationProfile& profile);

struct VelocityNormReport {
  double sup_norm = 0.0;
  double holder_seminorm = 0.0;  // max over sampled pairs
  double exponent = 0.0;
  int sample_pair_count = 0;
};

/// Sampled C^exponent seminorm: base points on a coarse sublattice, partners
/// at dyadic grid-aligned separations along axis and diagonal directions.
/// Deterministic; `stride` controls the base-point density (>= 1).
VelocityNormReport velocity_holder_norm(const VelocityField& u,
                                        double exponent, int stride = 4);

}  // namespace sqg
