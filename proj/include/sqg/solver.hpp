#pragma once

// Time integration of the dissipative quasi-geostrophic equation
//
//   d_t theta + u . grad theta + kappa (-Delta)^alpha theta = 0,
//   u = R(theta) divergence-free,
//
// on the periodic torus, with an integrating-factor RK4 scheme: the
// dissipative semigroup exp(-kappa |k|^{2 alpha} dt) is applied exactly and
// only the dealiased transport term is integrated numerically.

#include <memory>
#include <string>
#include <vector>

#include "sqg/field.hpp"
#include "sqg/spectral.hpp"

namespace sqg {

struct SimConfig {
  Grid grid;
  double kappa = 0.0;      // > 0
  double alpha = 0.5;      // in (0, 1]
  double dt = 0.0;         // > 0; halved automatically when the CFL guard trips
  double t_end = 0.0;      // > 0
  bool dealias = true;
  VelocityLaw velocity_law = VelocityLaw::sqg;
  int snapshot_stride = 1;  // store every k-th step (>= 1)
  std::shared_ptr<MultiplierTable> custom_multiplier;  // required iff law == custom

  void validate() const;
};

/// Advective CFL guard: dt * max|u| * N / L <= kCflLimit. Violations halve
/// dt (repeatedly if needed); dt never grows back, keeping runs deterministic.
inline constexpr double kCflLimit = 0.5;

/// Integration aborts once sup|theta| exceeds this factor times its initial
/// value (or on any non-finite value); the trajectory keeps the last good state.
inline constexpr double kBlowUpFactor = 10.0;

struct SimState {
  double time = 0.0;
  SpectralField theta_hat;
};

/// One stored time slice. dissipation_integral accumulates
/// int_0^t ||Lambda^alpha theta||_{L2}^2 ds with an Euler-Maclaurin-corrected
/// per-step trapezoid, so energy bookkeeping is accurate to O(dt^4).
struct Snapshot {
  double time = 0.0;
  SpectralField theta_hat;
  double l2 = 0.0;
  double sup = 0.0;
  double dissipation_integral = 0.0;
};

class TrajectoryStore {
 public:
  explicit TrajectoryStore(SimConfig cfg) : cfg_(std::move(cfg)) {}

  const SimConfig& config() const { return cfg_; }
  size_t size() const { return snaps_.size(); }
  const Snapshot& operator[](size_t i) const { return snaps_[i]; }
  const std::vector<Snapshot>& snapshots() const { return snaps_; }

  /// Appends a snapshot; times must be strictly increasing.
  void add(Snapshot s);

  /// Index of the last snapshot with time <= t (throws if t precedes the
  /// first snapshot).
  size_t index_at(double t) const;

  /// Coefficients linearly interpolated in time between snapshots.
  SpectralField interpolate(double t) const;

  bool aborted() const { return aborted_; }
  const std::string& abort_reason() const { return abort_reason_; }
  void mark_aborted(std::string reason);

 private:
  SimConfig cfg_;
  std::vector<Snapshot> snaps_;
  bool aborted_ = false;
  std::string abort_reason_;
};

class Solver {
 public:
  /// Validates the config and installs the initial data (mean preserved;
  /// dealiased first when cfg.dealias is set).
  Solver(const SimConfig& cfg, const PhysicalField& theta0);

  const SimState& state() const { return state_; }
  double current_dt() const { return dt_; }
  double dissipation_integral() const { return diss_integral_; }

  /// Advances one step (possibly shortened to land exactly on t_end).
  /// Throws std::runtime_error on non-finite values with a diagnostic.
  void step();

  /// Runs to t_end, storing every snapshot_stride-th step plus the initial
  /// and final states. Blow-up or NaN aborts the run; the returned store is
  /// marked aborted and keeps the last good snapshot.
  TrajectoryStore run();

 private:
  SpectralField nonlinear(const SpectralField& th, double* max_speed) const;
  double dissipation_rate(const SpectralField& th) const;
  double dissipation_rate_derivative(const SpectralField& th,
                                     const SpectralField& rhs) const;
  void apply_semigroup(SpectralField& th, double h) const;
  Snapshot make_snapshot() const;

  SimConfig cfg_;
  SimState state_;
  double dt_ = 0.0;
  double diss_integral_ = 0.0;
  double sup0_ = 0.0;
  std::vector<double> ksym_;  // |k_phys|^{2 alpha}, Nyquist included
};

/// Convenience wrapper: construct, run, return the trajectory.
TrajectoryStore run_simulation(const SimConfig& cfg, const PhysicalField& theta0);

struct EnergyBalanceReport {
  /// max over snapshot intervals of
  ///   |Delta ||theta||_2^2 + 2 kappa Delta dissipation| / (||theta_0||_2^2 dt)
  double max_residual_per_unit_time = 0.0;
  std::vector<double> interval_residuals;
};

EnergyBalanceReport energy_balance_residual(const TrajectoryStore& traj);

/// The scaling family theta_mu(x, t) = mu^{2 alpha - 1} theta(mu x, mu^{2 alpha} t)
/// resampled on the same grid at the available times; mu is a positive
/// integer so mu x respects periodicity. Modes pushed past Nyquist are
/// truncated (not aliased).
TrajectoryStore rescale_solution(const TrajectoryStore& traj, int mu);

/// Max over interior snapshots of || d_t theta + u . grad theta
/// + kappa Lambda^{2 alpha} theta ||_2 / ||theta(0)||_2, with d_t from
/// central differences on the snapshot times. Needs >= 3 snapshots.
double pde_residual(const TrajectoryStore& traj);

}  // namespace sqg
