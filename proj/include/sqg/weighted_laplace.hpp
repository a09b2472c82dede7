#pragma once

#include <functional>
#include <vector>

namespace sqg {

/// Rectangle [x0,x1] x [z0,z1] discretized into nx-by-nz uniform cells.
/// Nodes are (nx+1)-by-(nz+1); z0 >= 0 so the weight z^b stays integrable.
struct LaplaceBox {
  double x0 = 0.0;
  double x1 = 1.0;
  double z0 = 0.0;
  double z1 = 1.0;
  int nx = 64;
  int nz = 64;

  void validate() const;
  double hx() const { return (x1 - x0) / nx; }
  double hz() const { return (z1 - z0) / nz; }
};

/// Dirichlet data sampled on the boundary of the box: value = g(x, z).
using BoundaryData = std::function<double(double, double)>;

/// Finite-difference solution of div(z^b grad f) = 0 with Dirichlet data.
///
/// Flux-form scheme: the conductance of a vertical cell face is the exact
/// integral harmonic mean of z^b over the face interval, so the degenerate
/// weight at z = 0 is handled without evaluating z^b at the boundary; the
/// conductance of a horizontal face is the exact cell average of z^b over
/// the dual interval. The resulting matrix is a symmetric M-matrix, so the
/// discrete maximum principle holds exactly.
struct WeightedLaplaceSolution {
  LaplaceBox box;
  double b = 0.0;
  std::vector<double> values;  // node-major: index iz * (nx + 1) + jx
  double algebraic_residual = 0.0;  // scaled defect of the scheme's own system

  double at(int iz, int jx) const {
    return values[static_cast<size_t>(iz) * (box.nx + 1) + jx];
  }
  double x_of(int jx) const { return box.x0 + jx * box.hx(); }
  double z_of(int iz) const { return box.z0 + iz * box.hz(); }
  /// Bilinear interpolation; clamps to the box.
  double value_at(double x, double z) const;
};

/// Solves div(z^b grad f) = 0 on the box with Dirichlet data g, b in (-1,1).
/// Throws std::runtime_error if the sparse factorization fails.
WeightedLaplaceSolution solve_weighted_laplace(const LaplaceBox& box, double b,
                                               const BoundaryData& g);

/// Defect of an independent pointwise-coefficient discretization evaluated on
/// the solved field, maximized over an interior sub-box (two cells away from
/// every side and z above a quarter height, clear of the z = 0 degeneracy).
/// Scaled to be dimensionless; decays like h^2 for smooth solutions.
double interior_equation_residual(const WeightedLaplaceSolution& sol);

/// Signed distance from a maximum-principle violation: minimum over the
/// interior of (max boundary - f) and (f - min boundary). Nonnegative up to
/// roundoff for any solve produced by this module.
double max_principle_slack(const WeightedLaplaceSolution& sol);

/// Barrier problem on [-4,4] x [0,4]: f1 = 0 on z = 0, f1 = 2 on the other
/// three sides. cells_per_unit sets the resolution (nx = 8 cpu, nz = 4 cpu).
WeightedLaplaceSolution barrier_f1(double b, int cells_per_unit);

/// Barrier problem on the strip [0, strip_length] x [0, 1]: f2 = 2 on the
/// left edge, 0 on top and bottom. The far edge is truncated to 0; the
/// truncation error is O(exp(-beta0 * strip_length)), far below fit noise.
WeightedLaplaceSolution barrier_f2(double b, int cells_per_unit,
                                   double strip_length = 6.0);

struct BarrierReport {
  double b = 0.0;
  int cells_per_unit = 0;
  // f1 quantities: margin lambda = (2 - max over [-2,2] x [0,2]) / 4.
  double f1_max_inner = 0.0;
  double lambda_margin = 0.0;
  // f2 quantities: log-linear fit of the column sup over x in [1, X/2],
  // modeling |f2(x, .)| <= cbar * exp(-beta0 * x).
  double beta0_fit = 0.0;
  double cbar_fit = 0.0;
  double fit_r2 = 0.0;
  // Scheme defects (algebraic: the solved linear system; interior: an
  // independent discretization of the continuous equation).
  double f1_algebraic_residual = 0.0;
  double f2_algebraic_residual = 0.0;
  double f1_interior_residual = 0.0;
  double f2_interior_residual = 0.0;
};

BarrierReport barrier_report(double b, int cells_per_unit);

}  // namespace sqg
