#include "sqg/experiment.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sqg/boxfield.hpp"
#include "sqg/degiorgi.hpp"
#include "sqg/diagnostics.hpp"
#include "sqg/snapshot_io.hpp"
#include "sqg/spectral.hpp"
#include "sqg/tolerances.hpp"
#include "sqg/weighted_laplace.hpp"
#include "sqg/zoom.hpp"

namespace fs = std::filesystem;

namespace sqg {

namespace {

constexpr double kTiny = 1e-300;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::string join_csv(const std::vector<std::string>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += v[i];
  }
  return out;
}

const std::set<std::string>& known_checks() {
  static const std::set<std::string> s{
      "energy_balance", "monotone_norms", "decay",        "level_set",
      "cordoba",        "interpolation",  "local_energy", "rescale",
      "holder",         "zoom",           "roundtrip"};
  return s;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::string json_number(double v) {
  if (!std::isfinite(v)) return "null";  // inf/nan have no JSON literal
  return fmt17(v);
}

CheckRecord make_record(const char* check, const std::string& case_label,
                        double value, const std::string& detail) {
  CheckRecord rec;
  rec.check = check;
  rec.case_label = case_label;
  rec.value = value;
  rec.tolerance = tol::check_tolerance(check);
  rec.pass = std::isfinite(value) && value <= rec.tolerance;
  rec.detail = detail;
  return rec;
}

// ---- individual checks ----------------------------------------------------

std::vector<CheckRecord> check_energy_balance(const TrajectoryStore& traj,
                                              const ExperimentSpec&) {
  const EnergyBalanceReport rep = energy_balance_residual(traj);
  return {make_record("energy_balance", "default", rep.max_residual_per_unit_time,
                      "max energy residual per unit time over snapshot intervals")};
}

std::vector<CheckRecord> check_monotone(const TrajectoryStore& traj,
                                        const ExperimentSpec&) {
  double inc_l2 = 0.0, inc_sup = 0.0;
  const double ref_l2 = std::max(traj[0].l2, kTiny);
  const double ref_sup = std::max(traj[0].sup, kTiny);
  for (size_t i = 1; i < traj.size(); ++i) {
    inc_l2 = std::max(inc_l2, (traj[i].l2 - traj[i - 1].l2) / ref_l2);
    inc_sup = std::max(inc_sup, (traj[i].sup - traj[i - 1].sup) / ref_sup);
  }
  return {make_record("monotone_l2", "default", std::max(0.0, inc_l2),
                      "max relative increase of the L2 norm between snapshots"),
          make_record("monotone_sup", "default", std::max(0.0, inc_sup),
                      "max relative increase of the sup norm between snapshots")};
}

std::vector<CheckRecord> check_decay(const TrajectoryStore& traj,
                                     const ExperimentSpec&) {
  const DecayReport rep = linf_decay_check(traj, 0.01);
  return {make_record("decay_bound", "default", rep.empirical_c,
                      "sup of t^{n/4a} sup|theta| / ||theta0||_2 over t >= 0.01 ("
                      + std::to_string(rep.series.size()) + " samples)")};
}

TrajectoryStore negate_trajectory(const TrajectoryStore& traj) {
  TrajectoryStore neg(traj.config());
  for (size_t i = 0; i < traj.size(); ++i) {
    Snapshot s = traj[i];
    for (auto& c : s.theta_hat.coeff) c = -c;
    neg.add(std::move(s));
  }
  return neg;
}

// The level-set recursion bounds theta from above; -theta solves the same
// equation, so the two one-sided fits combine into the L-infinity bound.
double fit_level_bound_two_sided(const TrajectoryStore& traj,
                                 const LevelSetFamily& family) {
  return std::max(fit_level_bound(traj, family),
                  fit_level_bound(negate_trajectory(traj), family));
}

LevelSetFamily family_for(const TrajectoryStore& traj) {
  LevelSetFamily fam;
  fam.M = std::max(traj[0].sup, kTiny);
  const double t_first = traj[0].time;
  const double t_last = traj[traj.size() - 1].time;
  fam.t0 = t_first + 0.5 * (t_last - t_first);
  fam.k_max = 6;
  fam.alpha = traj.config().alpha;
  fam.n = 2;
  return fam;
}

std::vector<CheckRecord> check_level_set(const TrajectoryStore& traj,
                                         const ExperimentSpec&) {
  std::vector<CheckRecord> recs;
  const double sup0 = traj[0].sup;
  const double e0 = std::max(traj[0].l2 * traj[0].l2, kTiny);
  const double t1 = traj[0].time, t2 = traj[traj.size() - 1].time;
  double worst = 0.0;
  for (double frac : {0.0, 0.25, 0.5, 0.75}) {
    const double slack = level_set_energy_check(traj, frac * sup0, t1, t2);
    worst = std::max(worst, -slack / e0);
  }
  recs.push_back(make_record("level_set_slack", "lambda_sweep",
                             std::max(0.0, worst),
                             "worst normalized negative slack over lambda in "
                             "{0, 1/4, 1/2, 3/4} sup|theta0|"));

  const LevelSetFamily fam = family_for(traj);
  const LevelEnergyReport seq = level_energy_sequence(traj, fam);
  recs.push_back(make_record("level_set_monotone", "family",
                             seq.u_nonincreasing ? 0.0 : 1.0,
                             "U_k nonincreasing over k = 0.." +
                                 std::to_string(fam.k_max)));

  const double m_star = fit_level_bound_two_sided(traj, fam);
  const double sup_t0 = traj[traj.index_at(fam.t0)].sup;
  recs.push_back(make_record(
      "level_bound_margin", "family",
      (sup_t0 - m_star) / std::max(sup_t0, kTiny),
      "fitted M* = " + fmt17(m_star) + " vs sup|theta(t0)| = " + fmt17(sup_t0)));
  return recs;
}

std::vector<CheckRecord> check_cordoba(const TrajectoryStore& traj,
                                       const ExperimentSpec& spec) {
  const Grid& g = traj.config().grid;
  double worst = 0.0;
  int cases = 0;
  for (int i = 0; i < 10; ++i) {
    const PhysicalField f = random_band_limited(
        g, spec.band, spec.amplitude, spec.seed * 1000 + i);
    const double level = 0.25 * sup_norm(f);
    for (double alpha : {0.3, 0.5}) {
      for (int which : {0, 1}) {
        const ConvexSpec cs = which == 0 ? ConvexSpec::square()
                                         : ConvexSpec::positive_part(level);
        const CordobaResult res = cordoba_check(f, cs, alpha);
        worst = std::max(worst, -res.min_slack / std::max(res.scale, kTiny));
        ++cases;
      }
    }
  }
  return {make_record("cordoba_slack", "random_fields", std::max(0.0, worst),
                      "worst normalized negative slack over " +
                          std::to_string(cases) + " field/convexity cases")};
}

std::vector<CheckRecord> check_interpolation(const TrajectoryStore& traj,
                                             const ExperimentSpec&) {
  const InterpolationReport rep = interpolation_check(traj, family_for(traj));
  return {make_record("interpolation_bound", "family", rep.max_ratio,
                      "max space-time interpolation ratio; " +
                          std::to_string(rep.evaluated) + " levels, " +
                          std::to_string(rep.skipped) + " degenerate")};
}

std::vector<CheckRecord> check_local_energy(const TrajectoryStore& traj,
                                            const ExperimentSpec& spec) {
  const PhysicalField slice = inverse_transform(traj[0].theta_hat);
  const Grid& g = slice.grid;
  int bi = 0, bj = 0;
  double best = -1.0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      if (slice.at(i, j) > best) {
        best = slice.at(i, j);
        bi = i;
        bj = j;
      }
  BumpSpec bump;
  bump.cx = g.coord(bi);
  bump.cy = g.coord(bj);
  bump.radius = g.length / 8.0;
  const LocalEnergyReport rep =
      local_energy_check(traj, spec.ext, bump, traj[0].time,
                         traj[traj.size() - 1].time);
  return {make_record("local_energy_bound", "bump_at_max", rep.fitted_factor,
                      "fitted inequality factor; C1 = " + fmt17(rep.c1) +
                          ", C2 = " + fmt17(rep.c2))};
}

std::vector<CheckRecord> check_rescale(const TrajectoryStore& traj,
                                       const ExperimentSpec&) {
  const double res0 = pde_residual(traj);
  const TrajectoryStore scaled = rescale_solution(traj, 2);
  const double res2 = pde_residual(scaled);
  return {make_record("rescale_residual_ratio", "mu2",
                      res2 / std::max(res0, kTiny),
                      "rescaled residual " + fmt17(res2) + " vs original " +
                          fmt17(res0))};
}

std::vector<CheckRecord> check_holder(const TrajectoryStore& traj,
                                      const ExperimentSpec&) {
  const SpectralField& th = traj[traj.size() - 1].theta_hat;
  const PhysicalField gx = inverse_transform(derivative(th, 0));
  const PhysicalField gy = inverse_transform(derivative(th, 1));
  const Grid& g = gx.grid;
  int bi = 0, bj = 0;
  double best = -1.0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const double m = std::hypot(gx.at(i, j), gy.at(i, j));
      if (m > best) {
        best = m;
        bi = i;
        bj = j;
      }
    }
  const PhysicalField slice = inverse_transform(th);
  const OscillationProfile prof = oscillation_profile(
      slice, {g.coord(bi), g.coord(bj)}, 0.5, 6, g.length / 4.0);
  const HolderEstimate est = holder_fit(prof);
  std::vector<CheckRecord> recs;
  recs.push_back(make_record("holder_positive", "steepest_point",
                             est.degenerate ? std::nan("") : -est.delta,
                             "fitted exponent " + fmt17(est.delta) + " over " +
                                 std::to_string(est.points_used) + " scales"));
  recs.push_back(make_record("holder_r2", "steepest_point",
                             est.degenerate ? std::nan("") : 1.0 - est.fit_r2,
                             "log-log fit r^2 = " + fmt17(est.fit_r2)));
  return recs;
}

std::vector<CheckRecord> check_zoom(const TrajectoryStore& traj,
                                    const ExperimentSpec&) {
  ZoomConfig zc;
  zc.mu = 0.2;
  zc.levels = 4;
  zc.ode_dt = 0.05;
  zc.samples_y = 9;
  zc.samples_z = 4;
  zc.samples_s = 4;
  const Grid& g = traj.config().grid;
  const ZoomSequence seq = zoom_sequence(
      traj, {g.length / 2.0, g.length / 2.0}, traj[0].time, zc);
  int contracting = 0;
  std::string factors;
  for (const ZoomLevel& lev : seq.levels) {
    if (lev.contraction > 0.0 && lev.contraction < 1.0) ++contracting;
    if (!factors.empty()) factors += " ";
    factors += fmt17(lev.contraction);
  }
  return {make_record("zoom_contraction", "center",
                      3.0 - static_cast<double>(contracting),
                      "per-level osc(Q1*)/osc(Q4*): " + factors +
                          (seq.degenerate_termination ? " (degenerate stop)" : ""))};
}

std::vector<CheckRecord> check_roundtrip(const TrajectoryStore& traj,
                                         const ExperimentSpec& spec) {
  const Snapshot& last = traj[traj.size() - 1];
  const PhysicalField f = inverse_transform(last.theta_hat);
  const fs::path tmp = fs::temp_directory_path() /
                       ("sqg_roundtrip_" + std::to_string(spec.seed) + "_" +
                        std::to_string(::getpid()) + ".snap");
  snapshot_write(tmp.string(), f, last.time, traj.config().alpha,
                 traj.config().kappa);
  const SnapshotFile back = snapshot_read(tmp.string());
  fs::remove(tmp);
  bool equal = back.field.grid == f.grid && back.time == last.time;
  if (equal)
    equal = std::memcmp(back.field.values.data(), f.values.data(),
                        f.values.size() * sizeof(double)) == 0;
  return {make_record("roundtrip", "final_slice", equal ? 0.0 : 1.0,
                      "bitwise snapshot round trip")};
}

using CheckFn = std::vector<CheckRecord> (*)(const TrajectoryStore&,
                                             const ExperimentSpec&);

const std::map<std::string, CheckFn>& check_registry() {
  static const std::map<std::string, CheckFn> reg{
      {"energy_balance", check_energy_balance},
      {"monotone_norms", check_monotone},
      {"decay", check_decay},
      {"level_set", check_level_set},
      {"cordoba", check_cordoba},
      {"interpolation", check_interpolation},
      {"local_energy", check_local_energy},
      {"rescale", check_rescale},
      {"holder", check_holder},
      {"zoom", check_zoom},
      {"roundtrip", check_roundtrip},
  };
  return reg;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
}

}  // namespace

void ExperimentSpec::validate() const {
  sim.validate();
  if (band < 1 || band > sim.grid.n / 2)
    throw std::invalid_argument("ExperimentSpec: band must lie in [1, N/2]");
  if (!(amplitude > 0.0) || !std::isfinite(amplitude))
    throw std::invalid_argument("ExperimentSpec: amplitude must be positive");
  for (const std::string& c : checks)
    if (!known_checks().count(c))
      throw std::invalid_argument("ExperimentSpec: unknown check " + c);
  if (std::find(checks.begin(), checks.end(), "zoom") != checks.end() &&
      sim.t_end < 4.0)
    throw std::invalid_argument(
        "ExperimentSpec: the zoom check needs t_end >= 4 (Q4* time window)");
  ext.validate();
}

ExperimentSpec parse_experiment(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key=value, got: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (kv.count(key))
      throw std::invalid_argument("config: duplicate key " + key);
    kv[key] = val;
  }

  auto take = [&kv](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) return std::pair<bool, std::string>{false, ""};
    std::pair<bool, std::string> out{true, it->second};
    kv.erase(it);
    return out;
  };
  auto to_double = [](const std::string& key, const std::string& v) {
    try {
      size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (...) {
      throw std::invalid_argument("config: bad number for " + key + ": " + v);
    }
  };
  auto to_int = [&to_double](const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    if (d != std::floor(d))
      throw std::invalid_argument("config: expected integer for " + key);
    return static_cast<long long>(d);
  };
  auto to_bool = [](const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw std::invalid_argument("config: expected true/false for " + key);
  };

  ExperimentSpec spec;
  auto n = take("n_points_per_axis");
  if (!n.first) throw std::invalid_argument("config: n_points_per_axis is required");
  double length = 2.0 * std::numbers::pi;
  if (auto v = take("domain_length"); v.first)
    length = to_double("domain_length", v.second);
  spec.sim.grid = Grid(static_cast<int>(to_int("n_points_per_axis", n.second)),
                       length);
  spec.sim.kappa = 0.1;
  spec.sim.alpha = 0.5;
  spec.sim.dt = 1e-3;
  spec.sim.t_end = 1.0;
  if (auto v = take("kappa"); v.first) spec.sim.kappa = to_double("kappa", v.second);
  if (auto v = take("alpha"); v.first) spec.sim.alpha = to_double("alpha", v.second);
  if (auto v = take("dt"); v.first) spec.sim.dt = to_double("dt", v.second);
  if (auto v = take("t_end"); v.first) spec.sim.t_end = to_double("t_end", v.second);
  if (auto v = take("dealias"); v.first)
    spec.sim.dealias = to_bool("dealias", v.second);
  if (auto v = take("velocity_law"); v.first) {
    if (v.second != "sqg")
      throw std::invalid_argument(
          "config: only velocity_law=sqg is expressible in a config file");
  }
  if (auto v = take("snapshot_stride"); v.first)
    spec.sim.snapshot_stride = static_cast<int>(to_int("snapshot_stride", v.second));
  else
    spec.sim.snapshot_stride = 10;
  if (auto v = take("seed"); v.first)
    spec.seed = static_cast<unsigned long long>(to_int("seed", v.second));
  if (auto v = take("band"); v.first)
    spec.band = static_cast<int>(to_int("band", v.second));
  if (auto v = take("amplitude"); v.first)
    spec.amplitude = to_double("amplitude", v.second);

  spec.ext = default_extension_config(spec.sim.grid, spec.sim.alpha);
  if (auto v = take("ext_z_min"); v.first)
    spec.ext.z_min = to_double("ext_z_min", v.second);
  if (auto v = take("ext_rho"); v.first)
    spec.ext.rho = to_double("ext_rho", v.second);
  if (auto v = take("ext_levels"); v.first)
    spec.ext.levels = static_cast<int>(to_int("ext_levels", v.second));
  if (auto v = take("ext_extrapolation_layers"); v.first)
    spec.ext.extrapolation_layers =
        static_cast<int>(to_int("ext_extrapolation_layers", v.second));
  if (auto v = take("ext_method"); v.first) {
    if (v.second == "bessel")
      spec.ext.method = ExtensionMethod::bessel_multiplier;
    else if (v.second == "quadrature")
      spec.ext.method = ExtensionMethod::kernel_quadrature;
    else
      throw std::invalid_argument("config: ext_method must be bessel or quadrature");
  }

  if (auto v = take("checks"); v.first) {
    if (v.second == "default")
      spec.checks = default_checks();
    else if (v.second == "all")
      spec.checks = all_checks();
    else
      spec.checks = split_csv(v.second);
  } else {
    spec.checks = default_checks();
  }

  if (!kv.empty())
    throw std::invalid_argument("config: unknown key " + kv.begin()->first);
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_experiment(buf.str());
}

std::string serialize_experiment(const ExperimentSpec& spec) {
  std::ostringstream os;
  os << "n_points_per_axis=" << spec.sim.grid.n << "\n";
  os << "domain_length=" << fmt17(spec.sim.grid.length) << "\n";
  os << "kappa=" << fmt17(spec.sim.kappa) << "\n";
  os << "alpha=" << fmt17(spec.sim.alpha) << "\n";
  os << "dt=" << fmt17(spec.sim.dt) << "\n";
  os << "t_end=" << fmt17(spec.sim.t_end) << "\n";
  os << "dealias=" << (spec.sim.dealias ? "true" : "false") << "\n";
  os << "velocity_law=sqg\n";
  os << "snapshot_stride=" << spec.sim.snapshot_stride << "\n";
  os << "seed=" << spec.seed << "\n";
  os << "band=" << spec.band << "\n";
  os << "amplitude=" << fmt17(spec.amplitude) << "\n";
  os << "ext_z_min=" << fmt17(spec.ext.z_min) << "\n";
  os << "ext_rho=" << fmt17(spec.ext.rho) << "\n";
  os << "ext_levels=" << spec.ext.levels << "\n";
  os << "ext_extrapolation_layers=" << spec.ext.extrapolation_layers << "\n";
  os << "ext_method="
     << (spec.ext.method == ExtensionMethod::bessel_multiplier ? "bessel"
                                                               : "quadrature")
     << "\n";
  os << "checks=" << join_csv(spec.checks) << "\n";
  return os.str();
}

std::vector<std::string> default_checks() {
  return {"energy_balance", "monotone_norms", "decay",
          "level_set",      "cordoba",        "roundtrip"};
}

std::vector<std::string> all_checks() {
  return {"energy_balance", "monotone_norms", "decay",   "level_set",
          "cordoba",        "interpolation",  "rescale", "local_energy",
          "holder",         "zoom",           "roundtrip"};
}

std::string to_json_line(const CheckRecord& rec) {
  std::ostringstream os;
  os << "{\"check\":\"" << json_escape(rec.check) << "\",\"case\":\""
     << json_escape(rec.case_label) << "\",\"value\":" << json_number(rec.value)
     << ",\"tolerance\":" << json_number(rec.tolerance)
     << ",\"pass\":" << (rec.pass ? "true" : "false") << ",\"detail\":\""
     << json_escape(rec.detail) << "\"}";
  return os.str();
}

std::vector<CheckRecord> run_checks(const TrajectoryStore& traj,
                                    const ExperimentSpec& spec) {
  std::vector<std::future<std::vector<CheckRecord>>> futs;
  futs.reserve(spec.checks.size());
  for (const std::string& name : spec.checks) {
    futs.push_back(std::async(std::launch::async, [&traj, &spec, name] {
      try {
        return check_registry().at(name)(traj, spec);
      } catch (const std::exception& ex) {
        // Surface the failure as a record; the unknown-to-the-table name
        // guarantees cmd_verify flags it.
        CheckRecord rec;
        rec.check = name;
        rec.case_label = "error";
        rec.value = std::nan("");
        rec.tolerance = std::nan("");
        rec.pass = false;
        rec.detail = ex.what();
        return std::vector<CheckRecord>{rec};
      }
    }));
  }
  std::vector<CheckRecord> out;
  for (auto& f : futs) {
    auto recs = f.get();
    out.insert(out.end(), recs.begin(), recs.end());
  }
  return out;
}

std::string sha256_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("sha256_file: cannot open " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256_file: digest init failed");
  }
  char buf[65536];
  while (is) {
    is.read(buf, sizeof buf);
    if (is.gcount() > 0 &&
        EVP_DigestUpdate(ctx, buf, static_cast<size_t>(is.gcount())) != 1) {
      EVP_MD_CTX_free(ctx);
      throw std::runtime_error("sha256_file: digest update failed");
    }
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    char b[4];
    std::snprintf(b, sizeof b, "%02x", md[i]);
    hex += b;
  }
  return hex;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  ExperimentSpec spec;
  try {
    spec = load_experiment(config_path);
  } catch (const std::exception& ex) {
    std::cerr << "run: " << ex.what() << "\n";
    return 2;
  }
  try {
    fs::create_directories(out_dir);
    const auto wall0 = std::chrono::steady_clock::now();

    const PhysicalField theta0 = random_band_limited(
        spec.sim.grid, spec.band, spec.amplitude, spec.seed);
    TrajectoryStore traj = run_simulation(spec.sim, theta0);

    std::vector<CheckRecord> records;
    records.push_back(make_record(
        "run_completed", "simulation", traj.aborted() ? 1.0 : 0.0,
        traj.aborted() ? traj.abort_reason() : "reached t_end"));
    if (!traj.aborted()) {
      auto check_records = run_checks(traj, spec);
      records.insert(records.end(), check_records.begin(), check_records.end());
    }

    const fs::path out(out_dir);
    write_text_file(out / "config.txt", serialize_experiment(spec));
    {
      const Snapshot& first = traj[0];
      snapshot_write((out / "initial.snap").string(),
                     inverse_transform(first.theta_hat), first.time,
                     spec.sim.alpha, spec.sim.kappa);
      const Snapshot& last = traj[traj.size() - 1];
      snapshot_write((out / "final.snap").string(),
                     inverse_transform(last.theta_hat), last.time,
                     spec.sim.alpha, spec.sim.kappa);
    }
    {
      std::ostringstream os;
      for (const CheckRecord& rec : records) os << to_json_line(rec) << "\n";
      write_text_file(out / "records.jsonl", os.str());
    }
    {
      // Wall-clock info lives here, outside the manifest, so identical specs
      // produce identical manifests.
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0)
              .count();
      const auto now = std::chrono::system_clock::now();
      const std::time_t tt = std::chrono::system_clock::to_time_t(now);
      char stamp[64];
      std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
      std::ostringstream os;
      os << "finished_at=" << stamp << "\n";
      os << "wall_seconds=" << fmt17(secs) << "\n";
      os << "snapshots=" << traj.size() << "\n";
      write_text_file(out / "run.log", os.str());
    }
    {
      std::ostringstream os;
      os << "{\"incomplete\":" << (traj.aborted() ? "true" : "false")
         << ",\"files\":{";
      bool first = true;
      for (const char* name :
           {"config.txt", "final.snap", "initial.snap", "records.jsonl"}) {
        if (!first) os << ",";
        first = false;
        os << "\"" << name << "\":\""
           << sha256_file((out / name).string()) << "\"";
      }
      os << "}}\n";
      write_text_file(out / "manifest.json", os.str());
    }

    int failures = 0;
    for (const CheckRecord& rec : records)
      if (!rec.pass) ++failures;
    std::cout << "run: " << records.size() << " records, " << failures
              << " failing, bundle at " << out_dir << "\n";
    return traj.aborted() ? 1 : 0;
  } catch (const std::exception& ex) {
    std::cerr << "run: " << ex.what() << "\n";
    return 2;
  }
}

int cmd_verify(const std::string& bundle_dir) {
  const fs::path dir(bundle_dir);
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) {
    std::cerr << "verify: no bundle (missing manifest.json) in " << bundle_dir
              << "\n";
    return 2;
  }
  nlohmann::json manifest;
  try {
    std::ifstream is(manifest_path);
    manifest = nlohmann::json::parse(is);
  } catch (const std::exception& ex) {
    std::cerr << "verify: corrupt manifest: " << ex.what() << "\n";
    return 2;
  }

  int violations = 0;
  if (manifest.value("incomplete", false)) {
    std::cout << "verify: bundle marked incomplete\n";
    ++violations;
  }
  if (!manifest.contains("files") || !manifest["files"].is_object()) {
    std::cerr << "verify: corrupt manifest: missing files map\n";
    return 2;
  }
  for (const auto& [name, hash] : manifest["files"].items()) {
    const fs::path p = dir / name;
    if (!fs::exists(p)) {
      std::cout << "verify: missing file " << name << "\n";
      ++violations;
      continue;
    }
    const std::string actual = sha256_file(p.string());
    if (actual != hash.get<std::string>()) {
      std::cout << "verify: manifest hash mismatch for " << name << "\n";
      ++violations;
    }
  }

  const fs::path records_path = dir / "records.jsonl";
  if (!fs::exists(records_path)) {
    std::cerr << "verify: bundle has no records.jsonl\n";
    return 2;
  }
  std::ifstream is(records_path);
  std::string line;
  int line_no = 0, checked = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const std::exception&) {
      std::cout << "verify: records.jsonl line " << line_no << " is not JSON\n";
      ++violations;
      continue;
    }
    const std::string check = rec.value("check", "");
    const double tol = tol::check_tolerance(check.c_str());
    const double value = rec.contains("value") && rec["value"].is_number()
                             ? rec["value"].get<double>()
                             : std::nan("");
    const bool recorded_pass = rec.value("pass", false);
    ++checked;
    if (std::isnan(tol)) {
      std::cout << "verify: line " << line_no << ": unknown check '" << check
                << "'\n";
      ++violations;
      continue;
    }
    const bool pass = std::isfinite(value) && value <= tol;
    if (!pass) {
      std::cout << "verify: " << check << "/" << rec.value("case", "")
                << " fails: value=" << fmt17(value)
                << " tolerance=" << fmt17(tol) << "\n";
      ++violations;
    } else if (!recorded_pass) {
      std::cout << "verify: " << check << "/" << rec.value("case", "")
                << " recorded as failing but passes the current table\n";
      ++violations;
    }
  }
  std::cout << "verify: " << checked << " records checked, " << violations
            << " violations\n";
  return violations == 0 ? 0 : 1;
}

int cmd_diagnose(const std::string& snapshot_path, const std::string& check,
                 const std::vector<std::pair<std::string, std::string>>& params) {
  auto param = [&params](const char* key, double fallback) {
    for (const auto& [k, v] : params)
      if (k == key) return std::stod(v);
    return fallback;
  };
  auto param_str = [&params](const char* key, const std::string& fallback) {
    for (const auto& [k, v] : params)
      if (k == key) return v;
    return fallback;
  };
  try {
    std::vector<CheckRecord> recs;
    if (check == "barriers") {
      const double b = param("b", 0.0);
      const int cells = static_cast<int>(param("cells", 64));
      const BarrierReport rep = barrier_report(b, cells);
      if (b == 0.0)
        recs.push_back(make_record(
            "barrier_beta0", "b0",
            std::abs(rep.beta0_fit / std::numbers::pi - 1.0),
            "fitted decay rate " + fmt17(rep.beta0_fit) + ", r^2 = " +
                fmt17(rep.fit_r2)));
      recs.push_back(make_record("barrier_lambda", "b" + fmt17(b),
                                 -rep.lambda_margin,
                                 "inner-box margin lambda = " +
                                     fmt17(rep.lambda_margin)));
    } else {
      const SnapshotFile snap = snapshot_read(snapshot_path);
      const double alpha_default = snap.alpha > 0.0 ? snap.alpha : 0.5;
      const double alpha = param("alpha", alpha_default);
      if (check == "cordoba") {
        const std::string fname = param_str("f", "square");
        ConvexSpec cs = ConvexSpec::square();
        if (fname == "positive_part")
          cs = ConvexSpec::positive_part(
              param("level", 0.25 * sup_norm(snap.field)));
        else if (fname != "square")
          throw std::invalid_argument("diagnose: f must be square or positive_part");
        const CordobaResult res = cordoba_check(snap.field, cs, alpha);
        recs.push_back(make_record(
            "cordoba_slack", fname,
            std::max(0.0, -res.min_slack / std::max(res.scale, kTiny)),
            "min slack " + fmt17(res.min_slack) + ", scale " + fmt17(res.scale)));
      } else if (check == "extension_identity") {
        const Grid& g = snap.field.grid;
        ExtensionConfig cfg = default_extension_config(g, alpha);
        const SpectralField th = dealias(forward_transform(snap.field));
        const double d_alpha = calibrate_normal_derivative(g, cfg);
        const PhysicalField nd =
            normal_derivative_limit(extend(th, cfg), d_alpha);
        const PhysicalField frac =
            inverse_transform(fractional_laplacian(th, alpha));
        double num = 0.0, den = 0.0;
        for (int i = 0; i < g.size(); ++i) {
          num = std::max(num, std::abs(nd.values[i] - frac.values[i]));
          den = std::max(den, std::abs(frac.values[i]));
        }
        recs.push_back(make_record("extension_identity", "snapshot",
                                   num / std::max(den, kTiny),
                                   "sup-norm relative error, d_alpha = " +
                                       fmt17(d_alpha)));
      } else if (check == "holder") {
        const Grid& g = snap.field.grid;
        const OscillationProfile prof = oscillation_profile(
            snap.field,
            {param("cx", g.length / 2.0), param("cy", g.length / 2.0)},
            param("mu", 0.5), static_cast<int>(param("scales", 6)),
            param("r0", g.length / 4.0));
        const HolderEstimate est = holder_fit(prof);
        recs.push_back(make_record("holder_positive", "point",
                                   est.degenerate ? std::nan("") : -est.delta,
                                   "fitted exponent " + fmt17(est.delta)));
        recs.push_back(make_record("holder_r2", "point",
                                   est.degenerate ? std::nan("") : 1.0 - est.fit_r2,
                                   "log-log fit r^2 = " + fmt17(est.fit_r2)));
      } else {
        std::cerr << "diagnose: unknown check " << check
                  << " (supported: cordoba, extension_identity, holder, barriers)\n";
        return 2;
      }
    }
    bool all_pass = true;
    for (const CheckRecord& rec : recs) {
      std::cout << to_json_line(rec) << "\n";
      all_pass = all_pass && rec.pass;
    }
    return all_pass ? 0 : 1;
  } catch (const std::exception& ex) {
    std::cerr << "diagnose: " << ex.what() << "\n";
    return 2;
  }
}

}  // namespace sqg
