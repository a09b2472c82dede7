#include "sqg/boxfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace sqg {

namespace {

/// Exact integral of z^b over [za, zb], 0 <= za <= zb, b > -1.
double weight_integral(double za, double zb, double b) {
  return (std::pow(zb, 1.0 + b) - std::pow(za, 1.0 + b)) / (1.0 + b);
}

/// Trapezoid weight of horizontal node i on an (nx+1)-node uniform grid.
double trapezoid_weight(int i, int nx, double h) {
  return (i == 0 || i == nx) ? 0.5 * h : h;
}

int classify(double v) {
  if (v <= 0.0) return 0;
  if (v >= 1.0) return 1;
  return 2;
}

}  // namespace

void BoxSpec::validate() const {
  if (n != 1 && n != 2) throw std::invalid_argument("BoxSpec: n must be 1 or 2");
  if (!(r > 0.0) || !std::isfinite(r))
    throw std::invalid_argument("BoxSpec: r must be positive and finite");
}

double& BoxField::at(int ix, int iy, int iz) {
  const int cols = nz + 1;
  if (spec.n == 1) return values[ix * cols + iz];
  return values[(ix * (nx + 1) + iy) * cols + iz];
}

double BoxField::at(int ix, int iy, int iz) const {
  return const_cast<BoxField*>(this)->at(ix, iy, iz);
}

BoxField sample_box(const BoxSpec& spec, int nx, int nz, const BoxSampler& f) {
  spec.validate();
  if (nx < 2 || nz < 2)
    throw std::invalid_argument("sample_box: need at least 2 cells per axis");
  BoxField out;
  out.spec = spec;
  out.nx = nx;
  out.nz = nz;
  const int ny_nodes = (spec.n == 2) ? nx + 1 : 1;
  out.values.resize(static_cast<size_t>(nx + 1) * ny_nodes * (nz + 1));
  for (int ix = 0; ix <= nx; ++ix) {
    for (int iy = 0; iy < ny_nodes; ++iy) {
      const std::array<double, 2> x{out.x_of(ix),
                                    spec.n == 2 ? out.x_of(iy) : 0.0};
      for (int iz = 0; iz <= nz; ++iz) {
        out.at(ix, spec.n == 2 ? iy : 0, iz) = f(x, out.z_of(iz));
      }
    }
  }
  return out;
}

BoxField random_smooth_box_field(const BoxSpec& spec, int nx, int nz,
                                 unsigned long long seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  struct Mode {
    double a;
    int mx, my, mz;
    double px, py, pz;
  };
  std::vector<Mode> modes;
  std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
  for (int mx = 0; mx <= 3; ++mx) {
    for (int my = 0; my <= (spec.n == 2 ? 3 : 0); ++my) {
      for (int mz = 0; mz <= 3; ++mz) {
        const double decay = 1.0 / (1.0 + mx * mx + my * my + mz * mz);
        modes.push_back({amp(gen) * decay, mx, my, mz, phase(gen), phase(gen),
                         phase(gen)});
      }
    }
  }
  // Normalized coordinates in [0, 1]; the profile is r-independent.
  auto profile = [&](const std::array<double, 2>& x, double z) {
    const double sx = (x[0] / spec.r + 1.0) / 2.0;
    const double sy = (x[1] / spec.r + 1.0) / 2.0;
    const double sz = z / spec.r;
    double v = 0.0;
    for (const Mode& m : modes) {
      v += m.a * std::cos(3.141592653589793 * m.mx * sx + m.px) *
           std::cos(3.141592653589793 * m.my * sy + m.py) *
           std::cos(3.141592653589793 * m.mz * sz + m.pz);
    }
    return v;
  };
  BoxField raw = sample_box(spec, nx, nz, profile);
  const auto [lo_it, hi_it] =
      std::minmax_element(raw.values.begin(), raw.values.end());
  const double lo = *lo_it, hi = *hi_it;
  const double span = std::max(hi - lo, 1e-300);
  // Map the sampled range to [-1/2, 3/2] so levels 0 and 1 are interior.
  for (double& v : raw.values) v = (v - lo) / span * 2.0 - 0.5;
  return raw;
}

WeightedSets weighted_set_measures(const BoxField& f, double b) {
  f.spec.validate();
  if (!(b > -1.0) || b >= 1.0)
    throw std::invalid_argument("weighted_set_measures: need -1 < b < 1");
  for (double v : f.values) {
    if (!std::isfinite(v))
      throw std::runtime_error("weighted_set_measures: non-finite sample");
  }
  const int nx = f.nx, nz = f.nz, n = f.spec.n;
  const double r = f.spec.r;
  const double hx = 2.0 * r / nx;
  const double hz = r / nz;
  const int ny_nodes = (n == 2) ? nx + 1 : 1;

  WeightedSets out;
  out.b_exponent = b;
  out.exact_total = std::pow(2.0 * r, n) * std::pow(r, 1.0 + b) / (1.0 + b);

  double acc[3] = {0.0, 0.0, 0.0};
  double k_acc = 0.0;
  for (int ix = 0; ix <= nx; ++ix) {
    for (int iy = 0; iy < ny_nodes; ++iy) {
      double wxy = trapezoid_weight(ix, nx, hx);
      if (n == 2) wxy *= trapezoid_weight(iy, nx, hx);
      const int jy = (n == 2) ? iy : 0;
      for (int iz = 0; iz < nz; ++iz) {
        const double v0 = f.at(ix, jy, iz);
        const double v1 = f.at(ix, jy, iz + 1);
        const double za = f.z_of(iz);
        const double zb = f.z_of(iz + 1);
        // Split [za, zb] at the linear crossings of levels 0 and 1.
        double ts[4] = {0.0, 1.0, 1.0, 1.0};
        int nt = 1;
        for (double level : {0.0, 1.0}) {
          if ((v0 - level) * (v1 - level) < 0.0) {
            ts[nt++] = (level - v0) / (v1 - v0);
          }
        }
        ts[nt++] = 1.0;
        std::sort(ts, ts + nt);
        for (int s = 0; s + 1 < nt; ++s) {
          const double ta = ts[s], tb = ts[s + 1];
          if (!(tb > ta)) continue;
          const double vm = v0 + (v1 - v0) * 0.5 * (ta + tb);
          acc[classify(vm)] +=
              wxy * weight_integral(za + ta * (zb - za), za + tb * (zb - za), b);
        }

        // Dirichlet contribution at the cell midpoint in z: vertical
        // difference plus horizontal central differences averaged across the
        // two z-levels (one-sided at the side walls).
        const double gz = (v1 - v0) / hz;
        auto dx_at = [&](int kz) {
          const int il = std::max(ix - 1, 0);
          const int ir = std::min(ix + 1, nx);
          return (f.at(ir, jy, kz) - f.at(il, jy, kz)) / ((ir - il) * hx);
        };
        double grad2 = gz * gz;
        const double gx = 0.5 * (dx_at(iz) + dx_at(iz + 1));
        grad2 += gx * gx;
        if (n == 2) {
          auto dy_at = [&](int kz) {
            const int jl = std::max(jy - 1, 0);
            const int jr = std::min(jy + 1, nx);
            return (f.at(ix, jr, kz) - f.at(ix, jl, kz)) / ((jr - jl) * hx);
          };
          const double gy = 0.5 * (dy_at(iz) + dy_at(iz + 1));
          grad2 += gy * gy;
        }
        k_acc += wxy * weight_integral(za, zb, b) * grad2;
      }
    }
  }
  out.a_w = acc[0];
  out.b_w = acc[1];
  out.c_w = acc[2];
  out.total = acc[0] + acc[1] + acc[2];
  out.k = k_acc;
  if (!std::isfinite(out.k))
    throw std::runtime_error(
        "weighted_set_measures: Dirichlet quantity is not finite");
  return out;
}

double isoperimetric_r_power(int n, double b, double p) {
  return 2.0 * (n + 1.0 + b) - (n + 1.0 + b) / (2.0 * p) - (n + b - 1.0) / 2.0;
}

double default_isoperimetric_p(double b) {
  return 2.0 * (1.0 + b) / (1.0 - b) + 1.0;
}

IsoperimetricReport isoperimetric_check(const BoxField& f, double b, double p) {
  if (!(p > 0.0))
    throw std::invalid_argument("isoperimetric_check: p must be positive");
  IsoperimetricReport rep;
  rep.sets = weighted_set_measures(f, b);
  rep.p = p;
  rep.r_power = isoperimetric_r_power(f.spec.n, b, p);
  rep.lhs = rep.sets.a_w * rep.sets.b_w;
  rep.rhs_no_constant = std::pow(f.spec.r, rep.r_power) *
                        std::pow(rep.sets.c_w, 1.0 / (2.0 * p)) *
                        std::sqrt(rep.sets.k);
  if (rep.lhs == 0.0) {
    rep.implied_constant = 0.0;
  } else if (rep.rhs_no_constant == 0.0) {
    rep.implied_constant = std::numeric_limits<double>::infinity();
  } else {
    rep.implied_constant = rep.lhs / rep.rhs_no_constant;
  }
  return rep;
}

double change_of_variables_check(const BoxField& f, double b) {
  WeightedSets weighted = weighted_set_measures(f, b);
  const int nx = f.nx, nz = f.nz, n = f.spec.n;
  const double r = f.spec.r;
  const double hx = 2.0 * r / nx;
  const double zt_max = std::pow(r, 1.0 + b) / (1.0 + b);
  const double hzt = zt_max / nz;
  const int ny_nodes = (n == 2) ? nx + 1 : 1;

  // Column-wise linear interpolation of f at a given z.
  auto interp = [&](int ix, int jy, double z) {
    const double u = std::clamp(z / (r / nz), 0.0, static_cast<double>(nz));
    const int i0 = std::min(static_cast<int>(u), nz - 1);
    const double t = u - i0;
    return f.at(ix, jy, i0) * (1.0 - t) + f.at(ix, jy, i0 + 1) * t;
  };

  double a_flat = 0.0;
  for (int ix = 0; ix <= nx; ++ix) {
    for (int iy = 0; iy < ny_nodes; ++iy) {
      double wxy = trapezoid_weight(ix, nx, hx);
      if (n == 2) wxy *= trapezoid_weight(iy, nx, hx);
      const int jy = (n == 2) ? iy : 0;
      double prev = interp(ix, jy, r * 0.0);
      for (int iz = 0; iz < nz; ++iz) {
        const double zt1 = (iz + 1) * hzt;
        const double z1 = std::pow((1.0 + b) * zt1, 1.0 / (1.0 + b));
        const double cur = interp(ix, jy, std::min(z1, r));
        const double v0 = prev, v1 = cur;
        prev = cur;
        if (v0 <= 0.0 && v1 <= 0.0) {
          a_flat += wxy * hzt;
        } else if ((v0 - 0.0) * (v1 - 0.0) < 0.0) {
          const double t = -v0 / (v1 - v0);
          a_flat += wxy * hzt * (v0 <= 0.0 ? t : 1.0 - t);
        }
      }
    }
  }
  const double scale = std::max(weighted.exact_total, 1e-300);
  return std::abs(weighted.a_w - a_flat) / scale;
}

}  // namespace sqg
