#include "sqg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sqg/spectral.hpp"

namespace sqg {

namespace {

/// Catmull-Rom weights for local coordinate t in [0, 1].
std::array<double, 4> cr_weights(double t) {
  const double t2 = t * t, t3 = t2 * t;
  return {0.5 * (-t + 2.0 * t2 - t3), 0.5 * (2.0 - 5.0 * t2 + 3.0 * t3),
          0.5 * (t + 4.0 * t2 - 3.0 * t3), 0.5 * (-t2 + t3)};
}

/// Periodic bicubic Catmull-Rom interpolation of grid samples.
double catmull_rom_2d(const PhysicalField& f, double x, double y) {
  const Grid& g = f.grid;
  const int n = g.n;
  const double h = g.spacing();
  const double ux = x / h, uy = y / h;
  const double fx = std::floor(ux), fy = std::floor(uy);
  const int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
  const auto wx = cr_weights(ux - fx);
  const auto wy = cr_weights(uy - fy);
  auto wrap = [n](int i) { return ((i % n) + n) % n; };
  double v = 0.0;
  for (int a = 0; a < 4; ++a) {
    const int i = wrap(ix - 1 + a);
    double row = 0.0;
    for (int c = 0; c < 4; ++c) row += wy[c] * f.at(i, wrap(iy - 1 + c));
    v += wx[a] * row;
  }
  return v;
}

struct BoxScan {
  double lo = 0.0, hi = 0.0;
  double max_grad = 0.0;
  int cells = 0;
};

/// Node scan of [cx-r, cx+r] x [cy-r, cy+r] with periodic wrap, recording
/// sup/inf and the largest central-difference gradient inside the box.
BoxScan scan_box(const PhysicalField& f, double cx, double cy, double r) {
  const Grid& g = f.grid;
  const int n = g.n;
  const double h = g.spacing();
  auto wrap = [n](int i) { return ((i % n) + n) % n; };
  const int i0 = static_cast<int>(std::ceil((cx - r) / h - 1e-12));
  const int i1 = static_cast<int>(std::floor((cx + r) / h + 1e-12));
  const int j0 = static_cast<int>(std::ceil((cy - r) / h - 1e-12));
  const int j1 = static_cast<int>(std::floor((cy + r) / h + 1e-12));
  BoxScan s;
  s.cells = std::min(i1 - i0, j1 - j0);
  bool first = true;
  for (int ii = i0; ii <= i1; ++ii) {
    const int i = wrap(ii);
    for (int jj = j0; jj <= j1; ++jj) {
      const int j = wrap(jj);
      const double v = f.at(i, j);
      if (first || v < s.lo) s.lo = v;
      if (first || v > s.hi) s.hi = v;
      first = false;
      const double gx = (f.at(wrap(i + 1), j) - f.at(wrap(i - 1), j)) / (2.0 * h);
      const double gy = (f.at(i, wrap(j + 1)) - f.at(i, wrap(j - 1))) / (2.0 * h);
      s.max_grad = std::max(s.max_grad, std::hypot(gx, gy));
    }
  }
  return s;
}

}  // namespace

std::array<double, 2> velocity_box_average(const TrajectoryStore& traj,
                                           double time,
                                           const std::array<double, 2>& center,
                                           double half_width) {
  const SimConfig& cfg = traj.config();
  const SpectralField th = traj.interpolate(time);
  const auto uh =
      riesz_velocity_spectrum(th, cfg.velocity_law, cfg.custom_multiplier.get());
  return {box_average(uh[0], center[0], center[1], half_width),
          box_average(uh[1], center[0], center[1], half_width)};
}

std::array<double, 2> AdvectedPath::at(double s) const {
  if (samples.empty()) throw std::logic_error("AdvectedPath: empty path");
  if (s <= samples.front().s) return samples.front().x;
  if (s >= samples.back().s) return samples.back().x;
  size_t i = 1;
  while (samples[i].s < s) ++i;
  const PathSample& a = samples[i - 1];
  const PathSample& b = samples[i];
  const double t = (s - a.s) / (b.s - a.s);
  return {a.x[0] + t * (b.x[0] - a.x[0]), a.x[1] + t * (b.x[1] - a.x[1])};
}

std::array<double, 2> AdvectedPath::rate_at(double s) const {
  if (samples.empty()) throw std::logic_error("AdvectedPath: empty path");
  if (s <= samples.front().s) return samples.front().rate;
  if (s >= samples.back().s) return samples.back().rate;
  size_t i = 1;
  while (samples[i].s < s) ++i;
  const PathSample& a = samples[i - 1];
  const PathSample& b = samples[i];
  const double t = (s - a.s) / (b.s - a.s);
  return {a.rate[0] + t * (b.rate[0] - a.rate[0]),
          a.rate[1] + t * (b.rate[1] - a.rate[1])};
}

AdvectedPath advected_center(const TrajectoryStore& traj,
                             const std::array<double, 2>& base,
                             double ball_radius, double t_start, double s_end,
                             double ds) {
  if (!(ball_radius > 0.0) || !(ds > 0.0) || !(s_end >= 0.0))
    throw std::invalid_argument("advected_center: bad parameters");
  auto vel = [&](double s, const std::array<double, 2>& x) {
    return velocity_box_average(traj, t_start + s,
                                {base[0] + x[0], base[1] + x[1]}, ball_radius);
  };
  AdvectedPath path;
  std::array<double, 2> x{0.0, 0.0};
  double s = 0.0;
  path.samples.push_back({0.0, x, vel(0.0, x)});
  const int steps = std::max(1, static_cast<int>(std::ceil(s_end / ds - 1e-12)));
  if (s_end == 0.0) return path;
  const double h = s_end / steps;
  for (int m = 0; m < steps; ++m) {
    const auto k1 = path.samples.back().rate;
    const auto k2 = vel(s + h / 2, {x[0] + h / 2 * k1[0], x[1] + h / 2 * k1[1]});
    const auto k3 = vel(s + h / 2, {x[0] + h / 2 * k2[0], x[1] + h / 2 * k2[1]});
    const auto k4 = vel(s + h, {x[0] + h * k3[0], x[1] + h * k3[1]});
    for (int d = 0; d < 2; ++d)
      x[d] += h / 6 * (k1[d] + 2 * k2[d] + 2 * k3[d] + k4[d]);
    s += h;
    path.samples.push_back({s, x, vel(s, x)});
  }
  return path;
}

OscillationProfile oscillation_profile(const PhysicalField& field,
                                       const std::array<double, 2>& center,
                                       double mu, int k_scales, double r0) {
  if (!(mu > 0.0) || mu >= 1.0)
    throw std::invalid_argument("oscillation_profile: need mu in (0, 1)");
  if (k_scales < 1 || !(r0 > 0.0))
    throw std::invalid_argument("oscillation_profile: bad scale parameters");
  const double h = field.grid.spacing();
  OscillationProfile prof;
  prof.mu = mu;
  prof.requested_scales = k_scales;
  // Find the retained scales first so "the two finest" is known.
  int keep = 0;
  for (int k = 0; k < k_scales; ++k) {
    const double r = r0 * std::pow(mu, k);
    if (2.0 * r / h < 4.0 - 1e-12) break;
    ++keep;
  }
  prof.truncated = keep < k_scales;
  for (int k = 0; k < keep; ++k) {
    const double r = r0 * std::pow(mu, k);
    const BoxScan s = scan_box(field, center[0], center[1], r);
    OscillationSample sample;
    sample.scale = r;
    double lo = s.lo, hi = s.hi;
    double h_eff = h;
    if (k >= keep - 2) {
      // Bicubic re-sampling on a 4x sublattice of the box.
      const int m = std::max(8, 4 * static_cast<int>(std::ceil(2.0 * r / h)));
      for (int a = 0; a <= m; ++a) {
        const double x = center[0] - r + 2.0 * r * a / m;
        for (int c = 0; c <= m; ++c) {
          const double y = center[1] - r + 2.0 * r * c / m;
          const double v = catmull_rom_2d(field, x, y);
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      h_eff = h / 4.0;
      sample.refined = true;
    }
    sample.osc = hi - lo;
    sample.error_bar = s.max_grad * h_eff;
    prof.samples.push_back(sample);
  }
  return prof;
}

OscillationProfile oscillation_profile_advected(
    const TrajectoryStore& traj, double t_start, double s_elapsed,
    const std::array<double, 2>& center, double ball_radius, double mu,
    int k_scales, double r0) {
  std::array<double, 2> shift{0.0, 0.0};
  if (s_elapsed > 0.0) {
    const AdvectedPath path = advected_center(traj, center, ball_radius,
                                              t_start, s_elapsed,
                                              s_elapsed / 64.0);
    shift = path.at(s_elapsed);
  }
  const PhysicalField slice =
      inverse_transform(traj.interpolate(t_start + s_elapsed));
  OscillationProfile prof = oscillation_profile(
      slice, {center[0] + shift[0], center[1] + shift[1]}, mu, k_scales, r0);
  prof.frame = OscFrame::advected;
  return prof;
}

HolderEstimate holder_fit(const OscillationProfile& profile) {
  HolderEstimate est;
  std::vector<double> xs, ys;
  for (const OscillationSample& s : profile.samples) {
    if (s.osc > 0.0 && s.scale > 0.0) {
      xs.push_back(std::log(s.scale));
      ys.push_back(std::log(s.osc));
      est.scale_min = est.points_used == 0 ? s.scale
                                           : std::min(est.scale_min, s.scale);
      est.scale_max = std::max(est.scale_max, s.scale);
      ++est.points_used;
    }
  }
  if (est.points_used < 4) {
    est.degenerate = true;
    return est;
  }
  const size_t m = xs.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < m; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  est.delta = sxy / sxx;
  est.fit_r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return est;
}

VelocityNormReport velocity_holder_norm(const VelocityField& u, double exponent,
                                        int stride) {
  if (!(exponent > 0.0) || exponent > 1.0)
    throw std::invalid_argument("velocity_holder_norm: exponent in (0, 1]");
  if (stride < 1) throw std::invalid_argument("velocity_holder_norm: stride >= 1");
  const Grid& g = u.grid();
  const int n = g.n;
  const double h = g.spacing();
  VelocityNormReport rep;
  rep.exponent = exponent;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      rep.sup_norm =
          std::max(rep.sup_norm, std::hypot(u.u1.at(i, j), u.u2.at(i, j)));
  auto wrap = [n](int i) { return ((i % n) + n) % n; };
  static constexpr int kDirs[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  for (int i = 0; i < n; i += stride) {
    for (int j = 0; j < n; j += stride) {
      for (int m = 1; m <= n / 4; m *= 2) {
        for (const auto& d : kDirs) {
          const int i2 = wrap(i + m * d[0]);
          const int j2 = wrap(j + m * d[1]);
          const double du1 = u.u1.at(i2, j2) - u.u1.at(i, j);
          const double du2 = u.u2.at(i2, j2) - u.u2.at(i, j);
          const double dist = m * h * std::hypot(d[0], d[1]);
          rep.holder_seminorm = std::max(
              rep.holder_seminorm,
              std::hypot(du1, du2) / std::pow(dist, exponent));
          ++rep.sample_pair_count;
        }
      }
    }
  }
  return rep;
}

}  // namespace sqg
