#include "sqg/zoom.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "sqg/extension.hpp"
#include "sqg/spectral.hpp"

namespace sqg {

namespace {

/// Recentring paths for levels 0..K and the box-average recursion for the
/// rescaled velocities.
class ZoomPaths {
 public:
  ZoomPaths(const TrajectoryStore& traj, const std::array<double, 2>& center,
            double t_base, const ZoomConfig& cfg)
      : traj_(traj), center_(center), t_base_(t_base), cfg_(cfg) {}

  /// Solves x_k over s in [0, s_max]; levels must be solved in order.
  void solve_level(int k, double s_max) {
    if (static_cast<int>(paths_.size()) != k)
      throw std::logic_error("ZoomPaths: levels must be solved in order");
    const double mu = cfg_.mu;
    const double ms = std::pow(mu, 2.0 * traj_.config().alpha);
    auto rhs = [&](double s, const std::array<double, 2>& x) {
      if (k == 0)
        return base_average({center_[0] + x[0], center_[1] + x[1]},
                            cfg_.ball_radius, s);
      return velocity_average(k - 1, {ms * x[0], ms * x[1]},
                              cfg_.ball_radius * mu, ms * s);
    };
    AdvectedPath path;
    std::array<double, 2> x{0.0, 0.0};
    path.samples.push_back({0.0, x, rhs(0.0, x)});
    const int steps =
        std::max(1, static_cast<int>(std::ceil(s_max / cfg_.ode_dt - 1e-12)));
    const double h = s_max / steps;
    double s = 0.0;
    for (int m = 0; m < steps; ++m) {
      const auto k1 = path.samples.back().rate;
      const auto k2 = rhs(s + h / 2, {x[0] + h / 2 * k1[0], x[1] + h / 2 * k1[1]});
      const auto k3 = rhs(s + h / 2, {x[0] + h / 2 * k2[0], x[1] + h / 2 * k2[1]});
      const auto k4 = rhs(s + h, {x[0] + h * k3[0], x[1] + h * k3[1]});
      for (int d = 0; d < 2; ++d)
        x[d] += h / 6 * (k1[d] + 2 * k2[d] + 2 * k3[d] + k4[d]);
      s += h;
      path.samples.push_back({s, x, rhs(s, x)});
    }
    paths_.push_back(std::move(path));
  }

  const AdvectedPath& path(int k) const { return paths_.at(k); }

  /// Composite displacement R_k(s) entering the unrolled view.
  std::array<double, 2> composite_shift(int k, double s) const {
    const double mu = cfg_.mu;
    const double ms = std::pow(mu, 2.0 * traj_.config().alpha);
    std::array<double, 2> acc{0.0, 0.0};
    double sloc = s;
    for (int j = k; j >= 1; --j) {
      const double c = std::pow(mu, 2.0 * traj_.config().alpha + j - 1);
      const auto xj = paths_[j].at(sloc);
      acc[0] += c * xj[0];
      acc[1] += c * xj[1];
      sloc *= ms;
    }
    const auto x0 = paths_[0].at(sloc);
    return {acc[0] + x0[0], acc[1] + x0[1]};
  }

 private:
  /// Mean of u_j over the box (level-j coordinates and time).
  std::array<double, 2> velocity_average(int j, const std::array<double, 2>& c,
                                         double h, double s) const {
    if (j == 0) {
      const auto x0 = paths_[0].at(s);
      auto avg = base_average(
          {center_[0] + c[0] + x0[0], center_[1] + c[1] + x0[1]}, h, s);
      const auto r0 = paths_[0].rate_at(s);
      return {avg[0] - r0[0], avg[1] - r0[1]};
    }
    const double mu = cfg_.mu;
    const double ms = std::pow(mu, 2.0 * traj_.config().alpha);
    const auto xj = paths_[j].at(s);
    const auto inner = velocity_average(
        j - 1, {mu * c[0] + ms * xj[0], mu * c[1] + ms * xj[1]}, mu * h,
        ms * s);
    const auto rj = paths_[j].rate_at(s);
    const double f = std::pow(mu, 2.0 * traj_.config().alpha - 1.0);
    return {f * (inner[0] - rj[0]), f * (inner[1] - rj[1])};
  }

  /// Mean of the stored solution's velocity over a box at absolute position
  /// and elapsed time s (level-0 clock).
  std::array<double, 2> base_average(const std::array<double, 2>& abs_center,
                                     double h, double s) const {
    return velocity_box_average(traj_, t_base_ + s, abs_center, h);
  }

  const TrajectoryStore& traj_;
  std::array<double, 2> center_;
  double t_base_;
  ZoomConfig cfg_;
  std::vector<AdvectedPath> paths_;
};

/// theta^* slab at a fixed height: every coefficient multiplied by the
/// extension profile phi_alpha(|k| z), with a per-|k| cache.
SpectralField extension_slab(const SpectralField& theta, double alpha, double z) {
  SpectralField out = theta;
  if (z == 0.0) return out;
  const Grid& g = theta.grid;
  const double ku = g.wavenumber_unit();
  std::unordered_map<long, double> cache;
  for (int i = 0; i < g.n; ++i) {
    const int mi = g.mode_of(i);
    for (int j = 0; j < g.n; ++j) {
      cplx& c = out.at(i, j);
      if (c == cplx{}) continue;
      const int mj = g.mode_of(j);
      const long key = static_cast<long>(mi) * mi + static_cast<long>(mj) * mj;
      auto it = cache.find(key);
      double phi;
      if (it == cache.end()) {
        phi = extension_multiplier_bessel(alpha, ku * std::sqrt(double(key)) * z);
        cache.emplace(key, phi);
      } else {
        phi = it->second;
      }
      c *= phi;
    }
  }
  return out;
}

struct OscAccum {
  double lo = 0.0, hi = 0.0;
  bool any = false;
  void add(double v) {
    if (!any || v < lo) lo = v;
    if (!any || v > hi) hi = v;
    any = true;
  }
  double osc() const { return any ? hi - lo : 0.0; }
  double mid() const { return any ? 0.5 * (hi + lo) : 0.0; }
};

}  // namespace

void ZoomConfig::validate() const {
  if (!(mu > 0.0) || mu > 1.0)
    throw std::invalid_argument("ZoomConfig: mu must lie in (0, 1]");
  if (levels < 1) throw std::invalid_argument("ZoomConfig: levels >= 1");
  if (!(ball_radius > 0.0) || !(ode_dt > 0.0))
    throw std::invalid_argument("ZoomConfig: bad ball_radius or ode_dt");
  if (samples_y < 3 || samples_z < 2 || samples_s < 2)
    throw std::invalid_argument("ZoomConfig: too few oscillation samples");
  if (!(degenerate_tol > 0.0))
    throw std::invalid_argument("ZoomConfig: degenerate_tol must be positive");
}

ZoomSequence zoom_sequence(const TrajectoryStore& traj,
                           const std::array<double, 2>& center, double t_base,
                           const ZoomConfig& cfg) {
  cfg.validate();
  if (traj.size() < 2) throw std::invalid_argument("zoom_sequence: empty trajectory");
  const double t_last = traj[traj.size() - 1].time;
  if (t_base + 4.0 > t_last + 1e-9)
    throw std::invalid_argument(
        "zoom_sequence: trajectory must cover [t_base, t_base + 4]");
  const double alpha = traj.config().alpha;
  const double mu = cfg.mu;
  const double ms = std::pow(mu, 2.0 * alpha);

  ZoomSequence seq;
  seq.config = cfg;
  seq.center = center;
  seq.t_base = t_base;

  ZoomPaths paths(traj, center, t_base, cfg);
  const double sup0 = traj[traj.index_at(t_base)].sup;
  const double degenerate_floor = cfg.degenerate_tol * std::max(1.0, sup0);

  double max_recenter_all = 0.0;
  for (int k = 0; k <= cfg.levels; ++k) {
    paths.solve_level(k, 4.0);

    ZoomLevel lev;
    lev.k = k;
    for (const PathSample& ps : paths.path(k).samples)
      lev.max_recenter =
          std::max(lev.max_recenter, std::hypot(ps.x[0], ps.x[1]));
    if (k >= 1) max_recenter_all = std::max(max_recenter_all, lev.max_recenter);

    // Sample F_k^* over Q_4^* and Q_1^*; Q_1^* uses its own slabs so the
    // small box is not under-resolved.
    const double scale_x = std::pow(mu, k);
    const double scale_t = std::pow(ms, k);
    const double amp = std::pow(mu, (2.0 * alpha - 1.0) * k);
    OscAccum acc1, acc4;
    for (double r : {4.0, 1.0}) {
      OscAccum& acc = (r == 4.0) ? acc4 : acc1;
      for (int qs = 0; qs < cfg.samples_s; ++qs) {
        const double s = r * qs / (cfg.samples_s - 1);
        const SpectralField th = traj.interpolate(t_base + scale_t * s);
        const auto shift = paths.composite_shift(k, s);
        for (int qz = 0; qz < cfg.samples_z; ++qz) {
          const double z = r * qz / (cfg.samples_z - 1);
          const SpectralField slab = extension_slab(th, alpha, scale_x * z);
          for (int iy = 0; iy < cfg.samples_y; ++iy) {
            const double y1 = -r + 2.0 * r * iy / (cfg.samples_y - 1);
            for (int jy = 0; jy < cfg.samples_y; ++jy) {
              const double y2 = -r + 2.0 * r * jy / (cfg.samples_y - 1);
              const double v = amp * evaluate_at(slab,
                                                 center[0] + scale_x * y1 + shift[0],
                                                 center[1] + scale_x * y2 + shift[1]);
              acc.add(v);
            }
          }
        }
      }
    }
    lev.osc_q1 = acc1.osc();
    lev.osc_q4 = acc4.osc();
    if (lev.osc_q4 < degenerate_floor) {
      seq.degenerate_termination = true;
      seq.levels.push_back(lev);
      break;
    }
    lev.contraction = lev.osc_q1 / lev.osc_q4;
    lev.normalization_scale = 4.0 / lev.osc_q4;
    lev.normalization_shift = acc4.mid();
    seq.levels.push_back(lev);
  }

  seq.guard_value = 4.0 * mu + max_recenter_all * ms;
  seq.guard_satisfied = seq.guard_value < 1.0;
  return seq;
}

}  // namespace sqg
