#pragma once

// Level-set machinery turned into computable diagnostics: truncation
// energies and their superlinear recursion, the L-infinity decay series,
// the pointwise convexity inequality f'(theta) Lambda^{2a} theta >=
// Lambda^{2a} f(theta), the space-time interpolation bound, and the local
// energy inequality for the extension. Every check returns a signed slack
// or ratio; thresholds live with the callers (one central tolerance table),
// so constant fitting stays auditable.

#include <functional>
#include <vector>

#include "sqg/extension.hpp"
#include "sqg/field.hpp"
#include "sqg/solver.hpp"

namespace sqg {

/// Dyadic truncation family: levels C_k = M (1 - 2^{-k}) climbing to M,
/// cut times t_k = t0 (1 - 2^{-k}) climbing to t0, with the interpolation
/// exponents q = 2 + 4 alpha / n, sigma = 2 alpha / (n + 2 alpha) and the
/// recursion-normalizing gamma = 2 (q - 1) / (q - 2).
struct LevelSetFamily {
  double M = 1.0;    // > 0
  double t0 = 1.0;   // > 0
  int k_max = 8;     // >= 1
  double alpha = 0.5;
  int n = 2;         // spatial dimension entering q and sigma

  double level(int k) const;
  double cut_time(int k) const;
  double q() const { return 2.0 + 4.0 * alpha / n; }
  double sigma() const { return 2.0 * alpha / (n + 2.0 * alpha); }
  double gamma() const { return 2.0 * (q() - 1.0) / (q() - 2.0); }
  /// Constant a such that V_k = a 2^{gamma k} U_k turns the energy
  /// recursion U_k <= (2 / (t0 M^{q-2})) 2^{(q-1)k} U_{k-1}^{q/2} into
  /// exactly V_k <= V_{k-1}^{q/2}.
  double v_normalization() const;
  void validate() const;
};

/// Pointwise truncation (theta - lambda)_+.
PhysicalField truncate(const PhysicalField& theta, double lambda);

/// Level-set energy inequality between two snapshot times:
///   int theta_l^2(t2) + 2 kappa int_{t1}^{t2} ||Lambda^a theta_l||_2^2
///     <= int theta_l^2(t1),
/// returned as slack = RHS - LHS. The time integral uses the trapezoid rule
/// over the stored snapshots with an Euler-Maclaurin endpoint correction
/// when the snapshot spacing is uniform. t1 and t2 must match snapshot
/// times (1e-9 relative).
double level_set_energy_check(const TrajectoryStore& traj, double lambda,
                              double t1, double t2);

struct LevelEnergyEntry {
  int k = 0;
  double level = 0.0;
  double cut_time = 0.0;
  double U = 0.0;
  double V = 0.0;
  double recursion_ratio = 0.0;  // V_k / V_{k-1}^{q/2}; 0 for k = 0 or 0/0
};

struct LevelEnergyReport {
  LevelSetFamily family;
  std::vector<LevelEnergyEntry> entries;
  bool u_nonincreasing = false;
  bool converged = false;  // U_{k_max} <= 1e-8 U_0
};

/// U_k = sup_{t >= t_k} int theta_k^2 + 2 kappa int_{t_k}^{end} ||Lambda^a
/// theta_k||_2^2 dt over the stored trajectory (theta_k truncated at C_k),
/// plus the normalized V_k and the per-step recursion ratios.
LevelEnergyReport level_energy_sequence(const TrajectoryStore& traj,
                                        const LevelSetFamily& family);

/// Smallest M (bisection) for which U_{k_max} <= 1e-8 U_0; U_0 does not
/// depend on M, so the threshold is fixed across the search. The fitted M
/// is the level-set upper bound on sup |theta| for t >= t0.
double fit_level_bound(const TrajectoryStore& traj, LevelSetFamily family);

struct DecaySample {
  double time = 0.0;
  double normalized = 0.0;  // t^{n / 4 alpha} ||theta(t)||_inf / ||theta_0||_2
};

struct DecayReport {
  std::vector<DecaySample> series;
  double empirical_c = 0.0;  // max of the series (the measured constant)
};

/// The decay-bound series over all snapshots with time >= t_min > 0.
DecayReport linf_decay_check(const TrajectoryStore& traj, double t_min);

/// Convex function specs accepted by cordoba_check. The smoothed positive
/// part is f(s) = ((s - level) + sqrt((s - level)^2 + width^2)) / 2, which
/// is C^infinity and strictly convex; width = 0 requests three grid
/// spacings' worth of the field's gradient scale at evaluation time.
struct ConvexSpec {
  enum class Kind { square, smoothed_positive_part, custom };
  Kind kind = Kind::square;
  double level = 0.0;
  double width = 0.0;
  std::function<double(double)> f;        // custom only
  std::function<double(double)> fprime;   // custom only

  static ConvexSpec square();
  static ConvexSpec positive_part(double level, double width = 0.0);
  /// Custom f is convexity-checked by midpoint sampling over the field
  /// range before use; non-convex specs are rejected.
  static ConvexSpec custom_fn(std::function<double(double)> f,
                              std::function<double(double)> fprime);
};

struct CordobaResult {
  double min_slack = 0.0;  // min over the grid of f'(theta) L theta - L f(theta)
  double scale = 0.0;      // max of the two term magnitudes, for relative tolerances
};

CordobaResult cordoba_check(const PhysicalField& theta, const ConvexSpec& spec,
                            double alpha);

/// Space-time interpolation ratio for one truncation level:
///   ||theta_l||^2_{L^q([t_start, end] x torus)}
///     / [ (sup_t int theta_l^2)^sigma (int int |Lambda^a theta_l|^2)^(1-sigma) ],
/// with q, sigma from (alpha, n). Returns NaN when either denominator
/// factor vanishes (degenerate by contract).
double interpolation_ratio(const TrajectoryStore& traj, double lambda,
                           double t_start, double alpha, int n);

struct InterpolationReport {
  double max_ratio = 0.0;
  int evaluated = 0;
  int skipped = 0;  // degenerate levels
};

/// Max of interpolation_ratio over the family's levels k = 0..k_max-1,
/// each over the window [t_k, end].
InterpolationReport interpolation_check(const TrajectoryStore& traj,
                                        const LevelSetFamily& family);

/// Smooth compactly supported bump eta(x) = exp(1 - 1/(1 - |x - c|^2/r^2))
/// inside the ball of radius r, 0 outside; gradient available in closed
/// form so cutoff quadrature carries no differencing error.
struct BumpSpec {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 1.0;

  double value(double x, double y, const Grid& g) const;
  /// Euclidean norm of grad eta at the point.
  double gradient_norm(double x, double y, const Grid& g) const;
};

PhysicalField sample_bump(const BumpSpec& spec, const Grid& g);
PhysicalField sample_bump_gradient_norm(const BumpSpec& spec, const Grid& g);

struct LocalEnergyReport {
  // Left side: (2 kappa / d_alpha) int int z^b |grad(eta (theta*)_+)|^2 dt
  // plus the final-time window energy. The 2 kappa / d_alpha factor is the
  // normalization that makes the u == 0 full-field case an identity (the
  // extension's Dirichlet energy represents dissipation only up to the
  // calibration constant).
  double lhs_extension_energy = 0.0;
  double lhs_final = 0.0;
  // Right side: initial window energy, the measured-C1 gradient term, and
  // the weighted cutoff-gradient term (same 2 kappa / d_alpha factor).
  double rhs_initial = 0.0;
  double rhs_gradient = 0.0;
  double rhs_ext_gradient = 0.0;
  double c1 = 0.0;  // ||u||_{L^inf_t L^{n/alpha}_x} over the window
  double c2 = 0.0;  // ||u||_{L^inf_t C^{1-2 alpha}_x} over the window
  double slack = 0.0;          // RHS - LHS
  double fitted_factor = 1.0;  // smallest F >= 1 with F RHS >= LHS
};

/// Evaluates every term of the local energy inequality on the stored
/// trajectory between snapshot times t1 < t2, with the extension rebuilt
/// per snapshot from cfg and the cutoff sampled from spec.
LocalEnergyReport local_energy_check(const TrajectoryStore& traj,
                                     const ExtensionConfig& cfg,
                                     const BumpSpec& spec, double t1, double t2);

}  // namespace sqg
