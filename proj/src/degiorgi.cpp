#include "sqg/degiorgi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "series_quadrature.hpp"
#include "sqg/diagnostics.hpp"
#include "sqg/spectral.hpp"

namespace sqg {

namespace {

constexpr double kTimeMatchTol = 1e-9;

bool times_match(double a, double b) {
  return std::abs(a - b) <= kTimeMatchTol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

// Snapshot indices with time in [t_lo, t_hi] (inclusive with tolerance).
std::vector<size_t> window_indices(const TrajectoryStore& traj, double t_lo, double t_hi) {
  std::vector<size_t> idx;
  for (size_t i = 0; i < traj.size(); ++i) {
    const double t = traj[i].time;
    if (t >= t_lo - kTimeMatchTol * (1.0 + std::abs(t_lo)) &&
        t <= t_hi + kTimeMatchTol * (1.0 + std::abs(t_hi)))
      idx.push_back(i);
  }
  return idx;
}

double squared_l2(const PhysicalField& f) {
  const double v = l2_norm(f);
  return v * v;
}

}  // namespace

double LevelSetFamily::level(int k) const { return M * (1.0 - std::pow(2.0, -k)); }

double LevelSetFamily::cut_time(int k) const { return t0 * (1.0 - std::pow(2.0, -k)); }

double LevelSetFamily::v_normalization() const {
  const double qq = q();
  return std::pow(std::pow(2.0, 1.0 + gamma() * qq / 2.0) / (t0 * std::pow(M, qq - 2.0)),
                  2.0 / (qq - 2.0));
}

void LevelSetFamily::validate() const {
  if (!(M > 0.0)) throw std::invalid_argument("LevelSetFamily: M must be positive");
  if (!(t0 > 0.0)) throw std::invalid_argument("LevelSetFamily: t0 must be positive");
  if (k_max < 1) throw std::invalid_argument("LevelSetFamily: k_max must be >= 1");
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("LevelSetFamily: alpha must lie in (0, 1]");
  if (n < 1) throw std::invalid_argument("LevelSetFamily: dimension must be >= 1");
}

PhysicalField truncate(const PhysicalField& theta, double lambda) {
  PhysicalField out(theta.grid);
  for (size_t i = 0; i < theta.values.size(); ++i)
    out.values[i] = std::max(theta.values[i] - lambda, 0.0);
  return out;
}

double level_set_energy_check(const TrajectoryStore& traj, double lambda, double t1,
                              double t2) {
  if (!(t1 < t2)) throw std::invalid_argument("level_set_energy_check: need t1 < t2");
  const auto idx = window_indices(traj, t1, t2);
  if (idx.size() < 2 || !times_match(traj[idx.front()].time, t1) ||
      !times_match(traj[idx.back()].time, t2))
    throw std::invalid_argument("level_set_energy_check: t1/t2 not snapshot times");

  const double alpha = traj.config().alpha;
  const double kappa = traj.config().kappa;
  std::vector<double> times, diss;
  times.reserve(idx.size());
  diss.reserve(idx.size());
  double e_first = 0.0, e_last = 0.0;
  for (size_t m = 0; m < idx.size(); ++m) {
    const Snapshot& s = traj[idx[m]];
    PhysicalField cut = truncate(inverse_transform(s.theta_hat), lambda);
    if (m == 0) e_first = squared_l2(cut);
    if (m + 1 == idx.size()) e_last = squared_l2(cut);
    const double d = sobolev_seminorm(forward_transform(cut), alpha);
    times.push_back(s.time);
    diss.push_back(d * d);
  }
  return e_first - e_last - 2.0 * kappa * detail::integrate_series(times, diss);
}

namespace {

// U at one level/cut-time over cached physical snapshots (times ascending).
double level_energy(const std::vector<double>& times,
                    const std::vector<PhysicalField>& fields, double level,
                    double t_cut, double alpha, double kappa) {
  double sup_energy = 0.0;
  std::vector<double> wt, wd;
  for (size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_cut - kTimeMatchTol * (1.0 + std::abs(t_cut))) continue;
    PhysicalField cut = truncate(fields[i], level);
    sup_energy = std::max(sup_energy, squared_l2(cut));
    const double d = sobolev_seminorm(forward_transform(cut), alpha);
    wt.push_back(times[i]);
    wd.push_back(d * d);
  }
  return sup_energy + 2.0 * kappa * detail::integrate_series(wt, wd);
}

}  // namespace

LevelEnergyReport level_energy_sequence(const TrajectoryStore& traj,
                                        const LevelSetFamily& family) {
  family.validate();
  if (traj.size() < 2 ||
      traj[traj.size() - 1].time < family.t0 * (1.0 - kTimeMatchTol))
    throw std::invalid_argument("level_energy_sequence: trajectory does not cover [0, t0]");

  std::vector<double> times(traj.size());
  std::vector<PhysicalField> fields(traj.size());
  for (size_t i = 0; i < traj.size(); ++i) {
    times[i] = traj[i].time;
    fields[i] = inverse_transform(traj[i].theta_hat);
  }

  const double alpha = traj.config().alpha;
  const double kappa = traj.config().kappa;
  LevelEnergyReport rep;
  rep.family = family;
  rep.u_nonincreasing = true;
  const double a = family.v_normalization();
  const double qh = family.q() / 2.0;
  for (int k = 0; k <= family.k_max; ++k) {
    LevelEnergyEntry e;
    e.k = k;
    e.level = family.level(k);
    e.cut_time = family.cut_time(k);
    e.U = level_energy(times, fields, e.level, e.cut_time, alpha, kappa);
    e.V = a * std::pow(2.0, family.gamma() * k) * e.U;
    if (k > 0) {
      const LevelEnergyEntry& prev = rep.entries.back();
      if (e.U > prev.U * (1.0 + 1e-12)) rep.u_nonincreasing = false;
      e.recursion_ratio = prev.V > 0.0 ? e.V / std::pow(prev.V, qh) : 0.0;
    }
    rep.entries.push_back(std::move(e));
  }
  rep.converged = rep.entries.back().U <= 1e-8 * rep.entries.front().U;
  return rep;
}

double fit_level_bound(const TrajectoryStore& traj, LevelSetFamily family) {
  family.M = 1.0;  // placeholder; the fit searches over M
  family.validate();
  if (traj.size() < 2 ||
      traj[traj.size() - 1].time < family.t0 * (1.0 - kTimeMatchTol))
    throw std::invalid_argument("fit_level_bound: trajectory does not cover [0, t0]");

  std::vector<double> times(traj.size());
  std::vector<PhysicalField> fields(traj.size());
  double sup_all = 0.0;
  for (size_t i = 0; i < traj.size(); ++i) {
    times[i] = traj[i].time;
    fields[i] = inverse_transform(traj[i].theta_hat);
    sup_all = std::max(sup_all, traj[i].sup);
  }

  const double alpha = traj.config().alpha;
  const double kappa = traj.config().kappa;
  const double u0 = level_energy(times, fields, 0.0, 0.0, alpha, kappa);
  if (u0 <= 0.0) return 0.0;
  const double threshold = 1e-8 * u0;
  const double t_cut = family.cut_time(family.k_max);
  const double frac = 1.0 - std::pow(2.0, -family.k_max);
  const auto u_top = [&](double m) {
    return level_energy(times, fields, m * frac, t_cut, alpha, kappa);
  };

  double hi = std::max(sup_all, 1e-30);
  int guard = 0;
  while (u_top(hi) > threshold && guard++ < 60) hi *= 2.0;
  if (u_top(hi) > threshold)
    throw std::runtime_error("fit_level_bound: no level reaches the threshold");
  double lo = 0.0;
  if (u_top(lo + 1e-300) <= threshold) return 0.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (u_top(mid) <= threshold ? hi : lo) = mid;
  }
  return hi;
}

DecayReport linf_decay_check(const TrajectoryStore& traj, double t_min) {
  if (traj.size() == 0) throw std::invalid_argument("linf_decay_check: empty trajectory");
  const double l2_0 = traj[0].l2;
  const double expo = 2.0 / (4.0 * traj.config().alpha);  // n / (4 alpha), n = 2
  DecayReport rep;
  if (l2_0 <= 0.0) {
    rep.series.reserve(traj.size());
    for (const Snapshot& s : traj.snapshots())
      if (s.time > 0.0 && s.time >= t_min) rep.series.push_back({s.time, 0.0});
    return rep;
  }
  for (const Snapshot& s : traj.snapshots()) {
    if (!(s.time > 0.0) || s.time < t_min) continue;
    const double v = s.sup * std::pow(s.time, expo) / l2_0;
    rep.series.push_back({s.time, v});
    rep.empirical_c = std::max(rep.empirical_c, v);
  }
  return rep;
}

ConvexSpec ConvexSpec::square() {
  ConvexSpec s;
  s.kind = Kind::square;
  return s;
}

ConvexSpec ConvexSpec::positive_part(double level, double width) {
  ConvexSpec s;
  s.kind = Kind::smoothed_positive_part;
  s.level = level;
  s.width = width;
  return s;
}

ConvexSpec ConvexSpec::custom_fn(std::function<double(double)> f,
                                 std::function<double(double)> fprime) {
  ConvexSpec s;
  s.kind = Kind::custom;
  s.f = std::move(f);
  s.fprime = std::move(fprime);
  return s;
}

CordobaResult cordoba_check(const PhysicalField& theta, const ConvexSpec& spec,
                            double alpha) {
  const SpectralField hat = forward_transform(theta);
  const PhysicalField lap = inverse_transform(fractional_laplacian(hat, alpha));

  double lo = theta.values.empty() ? 0.0 : theta.values[0];
  double hi = lo;
  for (double v : theta.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  std::function<double(double)> f, fp;
  switch (spec.kind) {
    case ConvexSpec::Kind::square:
      f = [](double s) { return s * s; };
      fp = [](double s) { return 2.0 * s; };
      break;
    case ConvexSpec::Kind::smoothed_positive_part: {
      double w = spec.width;
      if (w <= 0.0) {
        // Three grid spacings' worth of field variation.
        const PhysicalField gx = inverse_transform(derivative(hat, 0));
        const PhysicalField gy = inverse_transform(derivative(hat, 1));
        double gmax = 0.0;
        for (size_t i = 0; i < gx.values.size(); ++i)
          gmax = std::max(gmax, std::hypot(gx.values[i], gy.values[i]));
        w = std::max(3.0 * theta.grid.spacing() * gmax,
                     1e-12 * std::max(1.0, std::abs(hi) + std::abs(lo)));
      }
      const double c = spec.level;
      f = [c, w](double s) { return 0.5 * ((s - c) + std::sqrt((s - c) * (s - c) + w * w)); };
      fp = [c, w](double s) { return 0.5 * (1.0 + (s - c) / std::sqrt((s - c) * (s - c) + w * w)); };
      break;
    }
    case ConvexSpec::Kind::custom: {
      if (!spec.f || !spec.fprime)
        throw std::invalid_argument("cordoba_check: custom spec needs f and fprime");
      // Midpoint-convexity sampling over the field range (with padding).
      const double pad = 0.1 * (hi - lo) + 1e-9;
      const double a = lo - pad, b = hi + pad;
      constexpr int kSamples = 241;
      double scale = 0.0;
      std::vector<double> fv(kSamples);
      for (int i = 0; i < kSamples; ++i) {
        fv[i] = spec.f(a + (b - a) * i / (kSamples - 1));
        scale = std::max(scale, std::abs(fv[i]));
      }
      for (int i = 1; i + 1 < kSamples; ++i)
        if (fv[i] > 0.5 * (fv[i - 1] + fv[i + 1]) + 1e-10 * (scale + 1.0))
          throw std::invalid_argument("cordoba_check: custom function is not convex");
      f = spec.f;
      fp = spec.fprime;
      break;
    }
  }

  PhysicalField ftheta(theta.grid);
  for (size_t i = 0; i < theta.values.size(); ++i) ftheta.values[i] = f(theta.values[i]);
  const PhysicalField lap_f =
      inverse_transform(fractional_laplacian(forward_transform(ftheta), alpha));

  CordobaResult res;
  res.min_slack = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < theta.values.size(); ++i) {
    const double lhs = fp(theta.values[i]) * lap.values[i];
    const double rhs = lap_f.values[i];
    res.min_slack = std::min(res.min_slack, lhs - rhs);
    res.scale = std::max(res.scale, std::max(std::abs(lhs), std::abs(rhs)));
  }
  if (theta.values.empty()) res.min_slack = 0.0;
  return res;
}

double interpolation_ratio(const TrajectoryStore& traj, double lambda, double t_start,
                           double alpha, int n) {
  const double q = 2.0 + 4.0 * alpha / n;
  const double sigma = 2.0 * alpha / (n + 2.0 * alpha);
  const double t_end = traj.size() ? traj[traj.size() - 1].time : 0.0;
  const auto idx = window_indices(traj, t_start, t_end);
  if (idx.size() < 2) return std::numeric_limits<double>::quiet_NaN();

  const double cell = traj.config().grid.cell_area();
  double sup_energy = 0.0;
  std::vector<double> times, diss, qpow;
  for (size_t m : idx) {
    const Snapshot& s = traj[m];
    PhysicalField cut = truncate(inverse_transform(s.theta_hat), lambda);
    sup_energy = std::max(sup_energy, squared_l2(cut));
    const double d = sobolev_seminorm(forward_transform(cut), alpha);
    double pq = 0.0;
    for (double v : cut.values) pq += std::pow(v, q);  // cut >= 0 pointwise
    times.push_back(s.time);
    diss.push_back(d * d);
    qpow.push_back(pq * cell);
  }
  const double i_diss = detail::integrate_series(times, diss);
  const double i_q = detail::integrate_series(times, qpow);
  if (!(sup_energy > 0.0) || !(i_diss > 0.0))
    return std::numeric_limits<double>::quiet_NaN();
  const double lhs = std::pow(i_q, 2.0 / q);
  const double rhs = std::pow(sup_energy, sigma) * std::pow(i_diss, 1.0 - sigma);
  return lhs / rhs;
}

InterpolationReport interpolation_check(const TrajectoryStore& traj,
                                        const LevelSetFamily& family) {
  family.validate();
  InterpolationReport rep;
  for (int k = 0; k < family.k_max; ++k) {
    const double r = interpolation_ratio(traj, family.level(k), family.cut_time(k),
                                         family.alpha, family.n);
    if (std::isnan(r)) {
      ++rep.skipped;
      continue;
    }
    ++rep.evaluated;
    rep.max_ratio = std::max(rep.max_ratio, r);
  }
  return rep;
}

namespace {

// Minimum-image displacement on the torus.
double wrap(double d, double length) {
  return d - length * std::round(d / length);
}

}  // namespace

double BumpSpec::value(double x, double y, const Grid& g) const {
  const double dx = wrap(x - cx, g.length), dy = wrap(y - cy, g.length);
  const double r2 = (dx * dx + dy * dy) / (radius * radius);
  if (r2 >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - r2));
}

double BumpSpec::gradient_norm(double x, double y, const Grid& g) const {
  const double dx = wrap(x - cx, g.length), dy = wrap(y - cy, g.length);
  const double r = std::hypot(dx, dy) / radius;
  const double r2 = r * r;
  if (r2 >= 1.0) return 0.0;
  const double one = 1.0 - r2;
  return std::exp(1.0 - 1.0 / one) * 2.0 * r / (one * one * radius);
}

PhysicalField sample_bump(const BumpSpec& spec, const Grid& g) {
  PhysicalField f(g);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) f.at(i, j) = spec.value(g.coord(i), g.coord(j), g);
  return f;
}

PhysicalField sample_bump_gradient_norm(const BumpSpec& spec, const Grid& g) {
  PhysicalField f(g);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      f.at(i, j) = spec.gradient_norm(g.coord(i), g.coord(j), g);
  return f;
}

namespace {

// Clip every layer of the extension at zero: (theta*)_+.
ExtensionField positive_part(const ExtensionField& ext) {
  ExtensionField out = ext;
  for (PhysicalField& layer : out.layer)
    for (double& v : layer.values) v = std::max(v, 0.0);
  return out;
}

// int int z^b g(x, z)^2 dx dz with g given per layer, the z-integral using
// the exact cell antiderivative and trapezoidal layer values (mirrors the
// cell rule inside weighted_dirichlet_energy).
double weighted_square_integral(const ExtensionField& ext,
                                const std::vector<double>& per_layer) {
  const double b = ext.config.b();
  double total = 0.0;
  for (size_t l = 0; l + 1 < ext.z.size(); ++l) {
    const double w = (std::pow(ext.z[l + 1], 1.0 + b) - std::pow(ext.z[l], 1.0 + b)) /
                     (1.0 + b);
    total += w * 0.5 * (per_layer[l] + per_layer[l + 1]);
  }
  return total;
}

}  // namespace

LocalEnergyReport local_energy_check(const TrajectoryStore& traj,
                                     const ExtensionConfig& cfg, const BumpSpec& spec,
                                     double t1, double t2) {
  if (!(t1 < t2)) throw std::invalid_argument("local_energy_check: need t1 < t2");
  const Grid& g = traj.config().grid;
  if (spec.radius >= 0.5 * g.length)
    throw std::invalid_argument(
        "local_energy_check: cutoff support must fit inside the fundamental domain");
  const auto idx = window_indices(traj, t1, t2);
  if (idx.size() < 2 || !times_match(traj[idx.front()].time, t1) ||
      !times_match(traj[idx.back()].time, t2))
    throw std::invalid_argument("local_energy_check: t1/t2 not snapshot times");

  const double alpha = traj.config().alpha;
  const double kappa = traj.config().kappa;
  const double d_alpha = calibrate_normal_derivative(g, cfg);
  const PhysicalField eta = sample_bump(spec, g);
  const PhysicalField grad_eta = sample_bump_gradient_norm(spec, g);
  const double cell = g.cell_area();
  const double lp = 2.0 / alpha;  // n / alpha with n = 2

  LocalEnergyReport rep;
  std::vector<double> times, ext_energy, ext_grad, trace_grad;
  for (size_t m = 0; m < idx.size(); ++m) {
    const Snapshot& s = traj[idx[m]];
    const PhysicalField theta = inverse_transform(s.theta_hat);
    const PhysicalField theta_pos = truncate(theta, 0.0);

    double window_energy = 0.0;
    for (size_t i = 0; i < theta_pos.values.size(); ++i) {
      const double v = eta.values[i] * theta_pos.values[i];
      window_energy += v * v;
    }
    window_energy *= cell;
    if (m == 0) rep.rhs_initial = window_energy;
    if (m + 1 == idx.size()) rep.lhs_final = window_energy;

    const ExtensionField pos_ext = positive_part(extend(s.theta_hat, cfg));
    std::vector<double> sq(pos_ext.z.size());
    for (size_t l = 0; l < pos_ext.z.size(); ++l) {
      double acc = 0.0;
      for (size_t i = 0; i < pos_ext.layer[l].values.size(); ++i) {
        const double v = grad_eta.values[i] * pos_ext.layer[l].values[i];
        acc += v * v;
      }
      sq[l] = acc * cell;
    }

    double tg = 0.0;
    for (size_t i = 0; i < theta_pos.values.size(); ++i) {
      const double v = grad_eta.values[i] * theta_pos.values[i];
      tg += v * v;
    }

    times.push_back(s.time);
    ext_energy.push_back(weighted_dirichlet_energy(pos_ext, &eta));
    ext_grad.push_back(weighted_square_integral(pos_ext, sq));
    trace_grad.push_back(tg * cell);

    const VelocityField u = riesz_velocity(s.theta_hat, traj.config().velocity_law,
                                           traj.config().custom_multiplier.get());
    double up = 0.0, usup = 0.0;
    for (size_t i = 0; i < u.u1.values.size(); ++i) {
      const double speed = std::hypot(u.u1.values[i], u.u2.values[i]);
      up += std::pow(speed, lp);
      usup = std::max(usup, speed);
    }
    rep.c1 = std::max(rep.c1, std::pow(up * cell, 1.0 / lp));
    double c2 = usup;
    if (1.0 - 2.0 * alpha > 1e-12)
      c2 += velocity_holder_norm(u, 1.0 - 2.0 * alpha).holder_seminorm;
    rep.c2 = std::max(rep.c2, c2);
  }

  const double norm = 2.0 * kappa / d_alpha;
  rep.lhs_extension_energy = norm * detail::integrate_series(times, ext_energy);
  rep.rhs_ext_gradient = norm * detail::integrate_series(times, ext_grad);
  rep.rhs_gradient = rep.c1 * detail::integrate_series(times, trace_grad);

  const double lhs = rep.lhs_extension_energy + rep.lhs_final;
  const double rhs = rep.rhs_initial + rep.rhs_gradient + rep.rhs_ext_gradient;
  rep.slack = rhs - lhs;
  rep.fitted_factor = lhs <= rhs ? 1.0
                      : rhs > 0.0 ? lhs / rhs
                                  : std::numeric_limits<double>::infinity();
  return rep;
}

}  // namespace sqg
