#include "sqg/weighted_laplace.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sqg {

namespace {

// Exact mean of z^b over [za, zb] (za >= 0, b > -1).
double weight_cell_average(double b, double za, double zb) {
  return (std::pow(zb, 1.0 + b) - std::pow(za, 1.0 + b)) / ((1.0 + b) * (zb - za));
}

// Conductance of a vertical face spanning [za, zb]: the flux -z^b f_z is
// continuous across the interval, so f(zb) - f(za) = -flux * int z^{-b},
// giving the exact integral harmonic mean below. Finite at za = 0 for b < 1.
double weight_harmonic_mean(double b, double za, double zb) {
  return (zb - za) * (1.0 - b) / (std::pow(zb, 1.0 - b) - std::pow(za, 1.0 - b));
}

}  // namespace

void LaplaceBox::validate() const {
  if (!(x1 > x0) || !(z1 > z0)) throw std::invalid_argument("LaplaceBox: empty box");
  if (z0 < 0.0) throw std::invalid_argument("LaplaceBox: z0 must be nonnegative");
  if (nx < 4 || nz < 4) throw std::invalid_argument("LaplaceBox: need >= 4 cells per axis");
}

double WeightedLaplaceSolution::value_at(double x, double z) const {
  const double hx = box.hx(), hz = box.hz();
  double sx = std::clamp((x - box.x0) / hx, 0.0, static_cast<double>(box.nx));
  double sz = std::clamp((z - box.z0) / hz, 0.0, static_cast<double>(box.nz));
  const int j = std::min(static_cast<int>(sx), box.nx - 1);
  const int i = std::min(static_cast<int>(sz), box.nz - 1);
  const double tx = sx - j, tz = sz - i;
  return (1 - tz) * ((1 - tx) * at(i, j) + tx * at(i, j + 1)) +
         tz * ((1 - tx) * at(i + 1, j) + tx * at(i + 1, j + 1));
}

WeightedLaplaceSolution solve_weighted_laplace(const LaplaceBox& box, double b,
                                               const BoundaryData& g) {
  box.validate();
  if (!(b > -1.0) || !(b < 1.0))
    throw std::invalid_argument("solve_weighted_laplace: b must lie in (-1, 1)");

  const int nx = box.nx, nz = box.nz;
  const double hx = box.hx(), hz = box.hz();

  WeightedLaplaceSolution sol;
  sol.box = box;
  sol.b = b;
  sol.values.assign(static_cast<size_t>(nx + 1) * (nz + 1), 0.0);

  for (int i = 0; i <= nz; ++i)
    for (int j = 0; j <= nx; ++j)
      if (i == 0 || i == nz || j == 0 || j == nx)
        sol.values[static_cast<size_t>(i) * (nx + 1) + j] =
            g(sol.x_of(j), sol.z_of(i));

  // Face conductances. Horizontal faces in row i carry the dual-cell average
  // of z^b; vertical faces between rows i and i+1 carry the harmonic mean.
  std::vector<double> row_avg(static_cast<size_t>(nz) + 1, 0.0);
  for (int i = 1; i < nz; ++i) {
    const double zc = sol.z_of(i);
    row_avg[i] = weight_cell_average(b, zc - 0.5 * hz, zc + 0.5 * hz);
  }
  std::vector<double> face_hm(static_cast<size_t>(nz), 0.0);
  for (int i = 0; i < nz; ++i)
    face_hm[i] = weight_harmonic_mean(b, sol.z_of(i), sol.z_of(i + 1));

  const auto unknown = [&](int i, int j) {
    return static_cast<long>(i - 1) * (nx - 1) + (j - 1);
  };
  const long n_unknown = static_cast<long>(nx - 1) * (nz - 1);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(5 * n_unknown));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_unknown);

  for (int i = 1; i < nz; ++i) {
    const double wh = row_avg[i] * hz / hx;   // horizontal faces in this row
    const double wu = face_hm[i] * hx / hz;   // face to row i+1
    const double wd = face_hm[i - 1] * hx / hz;  // face to row i-1
    for (int j = 1; j < nx; ++j) {
      const long p = unknown(i, j);
      double diag = 0.0;
      const auto couple = [&](int in, int jn, double w) {
        diag += w;
        if (in == 0 || in == nz || jn == 0 || jn == nx)
          rhs[p] += w * sol.values[static_cast<size_t>(in) * (nx + 1) + jn];
        else
          trips.emplace_back(p, unknown(in, jn), -w);
      };
      couple(i, j - 1, wh);
      couple(i, j + 1, wh);
      couple(i - 1, j, wd);
      couple(i + 1, j, wu);
      trips.emplace_back(p, p, diag);
    }
  }

  Eigen::SparseMatrix<double> A(n_unknown, n_unknown);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("solve_weighted_laplace: factorization failed");
  Eigen::VectorXd f = ldlt.solve(rhs);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("solve_weighted_laplace: solve failed");

  for (int i = 1; i < nz; ++i)
    for (int j = 1; j < nx; ++j)
      sol.values[static_cast<size_t>(i) * (nx + 1) + j] = f[unknown(i, j)];

  const Eigen::VectorXd defect = A * f - rhs;
  const double scale =
      rhs.lpNorm<Eigen::Infinity>() + A.coeffs().cwiseAbs().maxCoeff() *
                                          std::max(1.0, f.lpNorm<Eigen::Infinity>());
  sol.algebraic_residual = defect.lpNorm<Eigen::Infinity>() / scale;
  return sol;
}

double interior_equation_residual(const WeightedLaplaceSolution& sol) {
  const LaplaceBox& box = sol.box;
  const double hx = box.hx(), hz = box.hz(), b = sol.b;
  const double z_floor = box.z0 + 0.25 * (box.z1 - box.z0);
  double worst = 0.0, fmax = 0.0;
  for (double v : sol.values) fmax = std::max(fmax, std::abs(v));
  if (fmax == 0.0) return 0.0;
  for (int i = 2; i <= box.nz - 2; ++i) {
    const double z = sol.z_of(i);
    if (z < z_floor) continue;
    const double wav = std::pow(z, b);
    const double wup = std::pow(z + 0.5 * hz, b);
    const double wdn = std::pow(z - 0.5 * hz, b);
    for (int j = 2; j <= box.nx - 2; ++j) {
      const double lap =
          wav * (sol.at(i, j + 1) - 2.0 * sol.at(i, j) + sol.at(i, j - 1)) / (hx * hx) +
          (wup * (sol.at(i + 1, j) - sol.at(i, j)) -
           wdn * (sol.at(i, j) - sol.at(i - 1, j))) /
              (hz * hz);
      const double scale = fmax * wav * 2.0 * (1.0 / (hx * hx) + 1.0 / (hz * hz));
      worst = std::max(worst, std::abs(lap) / scale);
    }
  }
  return worst;
}

double max_principle_slack(const WeightedLaplaceSolution& sol) {
  const int nx = sol.box.nx, nz = sol.box.nz;
  double bmin = sol.at(0, 0), bmax = sol.at(0, 0);
  double imin = sol.at(1, 1), imax = sol.at(1, 1);
  for (int i = 0; i <= nz; ++i)
    for (int j = 0; j <= nx; ++j) {
      const double v = sol.at(i, j);
      if (i == 0 || i == nz || j == 0 || j == nx) {
        bmin = std::min(bmin, v);
        bmax = std::max(bmax, v);
      } else {
        imin = std::min(imin, v);
        imax = std::max(imax, v);
      }
    }
  return std::min(bmax - imax, imin - bmin);
}

WeightedLaplaceSolution barrier_f1(double b, int cells_per_unit) {
  LaplaceBox box;
  box.x0 = -4.0;
  box.x1 = 4.0;
  box.z0 = 0.0;
  box.z1 = 4.0;
  box.nx = 8 * cells_per_unit;
  box.nz = 4 * cells_per_unit;
  return solve_weighted_laplace(
      box, b, [](double, double z) { return z == 0.0 ? 0.0 : 2.0; });
}

WeightedLaplaceSolution barrier_f2(double b, int cells_per_unit, double strip_length) {
  LaplaceBox box;
  box.x0 = 0.0;
  box.x1 = strip_length;
  box.z0 = 0.0;
  box.z1 = 1.0;
  box.nx = static_cast<int>(std::lround(strip_length * cells_per_unit));
  box.nz = cells_per_unit;
  return solve_weighted_laplace(box, b, [](double x, double z) {
    if (x == 0.0 && z > 0.0 && z < 1.0) return 2.0;
    return 0.0;
  });
}

BarrierReport barrier_report(double b, int cells_per_unit) {
  BarrierReport rep;
  rep.b = b;
  rep.cells_per_unit = cells_per_unit;

  WeightedLaplaceSolution f1 = barrier_f1(b, cells_per_unit);
  rep.f1_algebraic_residual = f1.algebraic_residual;
  rep.f1_interior_residual = interior_equation_residual(f1);
  double inner_max = 0.0;
  for (int i = 0; i <= f1.box.nz; ++i) {
    if (f1.z_of(i) > 2.0 + 1e-12) break;
    for (int j = 0; j <= f1.box.nx; ++j)
      if (std::abs(f1.x_of(j)) <= 2.0 + 1e-12)
        inner_max = std::max(inner_max, f1.at(i, j));
  }
  rep.f1_max_inner = inner_max;
  rep.lambda_margin = (2.0 - inner_max) / 4.0;

  WeightedLaplaceSolution f2 = barrier_f2(b, cells_per_unit);
  rep.f2_algebraic_residual = f2.algebraic_residual;
  rep.f2_interior_residual = interior_equation_residual(f2);

  // Column sup decays like cbar * exp(-beta0 x); fit log-linearly over a
  // window clear of both the inlet boundary layer and the truncated far end.
  const double x_lo = 1.0, x_hi = 0.5 * (f2.box.x1 - f2.box.x0);
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int m = 0;
  for (int j = 0; j <= f2.box.nx; ++j) {
    const double x = f2.x_of(j);
    if (x < x_lo || x > x_hi) continue;
    double col = 0.0;
    for (int i = 0; i <= f2.box.nz; ++i) col = std::max(col, std::abs(f2.at(i, j)));
    if (col <= 0.0) continue;
    const double y = std::log(col);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++m;
  }
  if (m >= 4) {
    const double det = m * sxx - sx * sx;
    const double slope = (m * sxy - sx * sy) / det;
    const double intercept = (sy - slope * sx) / m;
    rep.beta0_fit = -slope;
    rep.cbar_fit = std::exp(intercept);
    const double ss_res = syy - intercept * sy - slope * sxy;
    const double ss_tot = syy - sy * sy / m;
    rep.fit_r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  }
  return rep;
}

}  // namespace sqg
