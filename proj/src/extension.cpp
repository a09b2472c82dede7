#include "sqg/extension.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <map>
#include <stdexcept>

#include "sqg/spectral.hpp"

namespace sqg {

namespace {
// Multiplier arguments past this point underflow K_alpha; the true value is
// below 1e-260, so clamping to zero is exact at double precision.
constexpr double kUnderflowClamp = 600.0;
}  // namespace

void ExtensionConfig::validate() const {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw std::invalid_argument("ExtensionConfig: alpha must lie in (0, 1)");
  if (!(z_min > 0.0)) throw std::invalid_argument("ExtensionConfig: z_min must be positive");
  if (!(rho > 1.0)) throw std::invalid_argument("ExtensionConfig: rho must exceed 1");
  if (levels < 8) throw std::invalid_argument("ExtensionConfig: need at least 8 levels");
  if (extrapolation_layers < 5)
    throw std::invalid_argument("ExtensionConfig: need >= 5 extrapolation layers");
}

std::vector<double> ExtensionConfig::nodes() const {
  std::vector<double> z(static_cast<size_t>(levels) + 2);
  z[0] = 0.0;
  double v = z_min;
  for (int j = 0; j <= levels; ++j, v *= rho) z[static_cast<size_t>(j) + 1] = v;
  return z;
}

ExtensionConfig default_extension_config(const Grid& g, double alpha) {
  ExtensionConfig cfg;
  cfg.alpha = alpha;
  cfg.z_min = 1e-4 * g.length;
  return cfg;
}

double modified_bessel_k(double nu, double x) {
  return boost::math::cyl_bessel_k(nu, x);
}

double extension_multiplier_bessel(double alpha, double s) {
  if (s == 0.0) return 1.0;
  if (s >= kUnderflowClamp) return 0.0;
  return std::pow(2.0, 1.0 - alpha) / std::tgamma(alpha) * std::pow(s, alpha) *
         modified_bessel_k(alpha, s);
}

namespace {

struct PowerTail {
  double exponent;  // (1 + t^2)^{-exponent}
};

double kernel_integrand(double t, void* params) {
  const double p = static_cast<const PowerTail*>(params)->exponent;
  return std::pow(1.0 + t * t, -p);
}

class GslGuard {
 public:
  GslGuard() { old_ = gsl_set_error_handler_off(); }
  ~GslGuard() { gsl_set_error_handler(old_); }

 private:
  gsl_error_handler_t* old_;
};

}  // namespace

double extension_multiplier_quadrature(double alpha, double s) {
  if (s == 0.0) return 1.0;
  if (s >= kUnderflowClamp) return 0.0;
  GslGuard guard;
  PowerTail tail{alpha + 0.5};
  gsl_function f;
  f.function = &kernel_integrand;
  f.params = &tail;

  constexpr size_t kLimit = 4000;
  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(kLimit);
  gsl_integration_workspace* cyc = gsl_integration_workspace_alloc(kLimit);
  gsl_integration_qawo_table* tab =
      gsl_integration_qawo_table_alloc(s, 1.0, GSL_INTEG_COSINE, 48);
  double num = 0.0, err = 0.0;
  int rc = gsl_integration_qawf(&f, 0.0, 1e-11, kLimit, ws, cyc, tab, &num, &err);
  gsl_integration_qawo_table_free(tab);
  gsl_integration_workspace_free(cyc);

  double den = 0.0;
  if (rc == GSL_SUCCESS) {
    double derr = 0.0;
    rc = gsl_integration_qagiu(&f, 0.0, 0.0, 1e-12, kLimit, ws, &den, &derr);
  }
  gsl_integration_workspace_free(ws);
  if (rc != GSL_SUCCESS)
    throw std::runtime_error("extension_multiplier_quadrature: quadrature failed");
  return num / den;
}

namespace {

std::vector<double> multiplier_profile(const ExtensionConfig& cfg,
                                       const std::vector<double>& args,
                                       bool* clamped) {
  std::map<double, double> cache;
  std::vector<double> out(args.size());
  for (size_t i = 0; i < args.size(); ++i) {
    const double s = args[i];
    if (s >= kUnderflowClamp && clamped) *clamped = true;
    auto it = cache.find(s);
    if (it == cache.end()) {
      const double v = cfg.method == ExtensionMethod::bessel_multiplier
                           ? extension_multiplier_bessel(cfg.alpha, s)
                           : extension_multiplier_quadrature(cfg.alpha, s);
      it = cache.emplace(s, v).first;
    }
    out[i] = it->second;
  }
  return out;
}

}  // namespace

ExtensionField extend(const SpectralField& theta_hat, const ExtensionConfig& cfg) {
  cfg.validate();
  const Grid& g = theta_hat.grid;
  const int n = g.n;
  const double ku = g.wavenumber_unit();

  ExtensionField ext;
  ext.grid = g;
  ext.config = cfg;
  ext.z = cfg.nodes();
  ext.layer.reserve(ext.z.size());
  ext.layer.push_back(inverse_transform(theta_hat));

  // Gather |k| for every populated mode once; the multiplier cache inside
  // multiplier_profile makes the quadrature route affordable on sparse
  // spectra (plane waves), which is its intended use.
  for (size_t lz = 1; lz < ext.z.size(); ++lz) {
    const double z = ext.z[lz];
    std::vector<double> args;
    std::vector<std::pair<int, int>> live;
    args.reserve(64);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (theta_hat.at(i, j) == cplx{}) continue;
        if (i == 0 && j == 0) continue;  // zero mode extends as the constant mean
        const double kx = ku * g.mode_of(i);
        const double ky = ku * g.mode_of(j);
        live.emplace_back(i, j);
        args.push_back(std::hypot(kx, ky) * z);
      }
    std::vector<double> phi = multiplier_profile(cfg, args, &ext.clamped);
    SpectralField slab(g);
    slab.mode(0, 0) = theta_hat.mode(0, 0);
    for (size_t m = 0; m < live.size(); ++m)
      slab.at(live[m].first, live[m].second) = theta_hat.at(live[m].first, live[m].second) * phi[m];
    ext.layer.push_back(inverse_transform(slab));
  }
  return ext;
}

ExtensionField extend(const PhysicalField& theta, const ExtensionConfig& cfg) {
  return extend(forward_transform(theta), cfg);
}

double extension_value_at(const SpectralField& theta_hat, double alpha, double x,
                          double y, double z) {
  const Grid& g = theta_hat.grid;
  const int n = g.n;
  const double ku = g.wavenumber_unit();
  cplx s{};
  for (int i = 0; i < n; ++i) {
    const double kx = ku * g.mode_of(i);
    for (int j = 0; j < n; ++j) {
      const cplx c = theta_hat.at(i, j);
      if (c == cplx{}) continue;
      const double ky = ku * g.mode_of(j);
      const double kk = std::hypot(kx, ky);
      const double phi = kk == 0.0 ? 1.0 : extension_multiplier_bessel(alpha, kk * z);
      if (phi == 0.0) continue;
      s += c * phi * std::polar(1.0, kx * x + ky * y);
    }
  }
  return s.real();
}

namespace {

/// One Richardson stage on a geometrically spaced sequence: eliminates the
/// z^p error term assuming consecutive abscissas differ by the factor rho.
std::vector<cplx> richardson_stage(const std::vector<cplx>& v, double rho, double p) {
  const double r = std::pow(rho, p);
  std::vector<cplx> w(v.size() - 1);
  for (size_t j = 0; j + 1 < v.size(); ++j) w[j] = (r * v[j] - v[j + 1]) / (r - 1.0);
  return w;
}

/// Extrapolates the weighted normal derivative -z^b f'(z) to z = 0 from
/// layer values of one Fourier mode on the geometric grid.
cplx extrapolate_mode_limit(const std::vector<cplx>& layer_vals,
                            const std::vector<double>& znodes, double b,
                            double alpha, double rho) {
  std::vector<cplx> q(layer_vals.size() - 1);
  for (size_t j = 0; j + 1 < layer_vals.size(); ++j) {
    const double dz = znodes[j + 1] - znodes[j];
    const double zmid = 0.5 * (znodes[j] + znodes[j + 1]);
    q[j] = -std::pow(zmid, b) * (layer_vals[j + 1] - layer_vals[j]) / dz;
  }
  // Known exponent ladder of the multiplier expansion (plus the midpoint
  // finite-difference error, which calibration absorbs: it is the same
  // multiple of the limit for every mode).
  double ladder[3] = {2.0 - 2.0 * alpha, 2.0, 4.0 - 2.0 * alpha};
  std::sort(std::begin(ladder), std::end(ladder));
  for (double p : ladder) {
    if (q.size() < 2) break;
    q = richardson_stage(q, rho, p);
  }
  return q.front();
}

}  // namespace

double calibrate_normal_derivative(const Grid& g, const ExtensionConfig& cfg) {
  cfg.validate();
  const double k1 = g.wavenumber_unit();
  const auto nodes = cfg.nodes();
  const int m = std::min(cfg.extrapolation_layers, cfg.levels + 1);
  std::vector<cplx> vals(static_cast<size_t>(m));
  std::vector<double> zn(static_cast<size_t>(m));
  for (int j = 0; j < m; ++j) {
    zn[j] = nodes[static_cast<size_t>(j) + 1];
    vals[j] = extension_multiplier_bessel(cfg.alpha, k1 * zn[j]);
  }
  const cplx raw = extrapolate_mode_limit(vals, zn, cfg.b(), cfg.alpha, cfg.rho);
  return raw.real() / std::pow(k1 * k1, cfg.alpha);
}

PhysicalField normal_derivative_limit(const ExtensionField& ext, double d_alpha) {
  const ExtensionConfig& cfg = ext.config;
  const Grid& g = ext.grid;
  if (!(d_alpha > 0.0))
    throw std::invalid_argument("normal_derivative_limit: calibration constant must be positive");
  // Boundary-layer resolution: at least three geometric nodes below 0.01 L.
  if (!(cfg.z_min * cfg.rho * cfg.rho <= 0.01 * g.length))
    throw std::invalid_argument(
        "normal_derivative_limit: z-grid does not resolve the boundary layer");

  const int m = std::min(cfg.extrapolation_layers, cfg.levels + 1);
  if (ext.num_layers() < m + 1)
    throw std::invalid_argument("normal_derivative_limit: too few layers");

  std::vector<SpectralField> hats;
  hats.reserve(static_cast<size_t>(m));
  for (int j = 0; j < m; ++j) hats.push_back(forward_transform(ext.layer[static_cast<size_t>(j) + 1]));
  std::vector<double> zn(ext.z.begin() + 1, ext.z.begin() + 1 + m);

  const int n = g.n;
  SpectralField out(g);
  std::vector<cplx> vals(static_cast<size_t>(m));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == 0 && j == 0) continue;  // limit of the mean is zero
      bool nonzero = false;
      for (int l = 0; l < m; ++l) {
        vals[l] = hats[l].at(i, j);
        if (vals[l] != cplx{}) nonzero = true;
      }
      if (!nonzero) continue;
      out.at(i, j) =
          extrapolate_mode_limit(vals, zn, cfg.b(), cfg.alpha, cfg.rho) / d_alpha;
    }
  return inverse_transform(out);
}

double weighted_dirichlet_energy(const ExtensionField& ext, const PhysicalField* cutoff) {
  const Grid& g = ext.grid;
  const double b = ext.config.b();
  const int n = g.n;
  const double ku = g.wavenumber_unit();
  const size_t nz = ext.z.size();

  if (cutoff && !(cutoff->grid == g))
    throw std::invalid_argument("weighted_dirichlet_energy: cutoff grid mismatch");

  // Per-layer x-gradient integrals, spectral: int |grad_x f|^2 = L^2 sum k^2 |f_hat|^2.
  std::vector<double> gx(nz, 0.0);
  std::vector<const std::vector<double>*> vals(nz);
  std::vector<PhysicalField> cut_layers;
  if (cutoff) cut_layers.reserve(nz);
  for (size_t l = 0; l < nz; ++l) {
    const PhysicalField* f = &ext.layer[l];
    if (cutoff) {
      PhysicalField prod(g);
      for (int idx = 0; idx < g.size(); ++idx)
        prod.values[idx] = ext.layer[l].values[idx] * cutoff->values[idx];
      cut_layers.push_back(std::move(prod));
      f = &cut_layers.back();
    }
    vals[l] = &f->values;
    SpectralField hat = forward_transform(*f);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const int mi = g.mode_of(i);
      const double kx = std::abs(mi) == n / 2 ? 0.0 : ku * mi;
      for (int j = 0; j < n; ++j) {
        const int mj = g.mode_of(j);
        const double ky = std::abs(mj) == n / 2 ? 0.0 : ku * mj;
        s += (kx * kx + ky * ky) * std::norm(hat.at(i, j));
      }
    }
    gx[l] = g.length * g.length * s;
  }

  const double cell = g.cell_area();
  double energy = 0.0;
  for (size_t l = 0; l + 1 < nz; ++l) {
    const double z0 = ext.z[l], z1 = ext.z[l + 1];
    const double w = (std::pow(z1, 1.0 + b) - std::pow(z0, 1.0 + b)) / (1.0 + b);
    const double dz = z1 - z0;
    double gz = 0.0;
    const std::vector<double>& a = *vals[l];
    const std::vector<double>& c = *vals[l + 1];
    for (size_t idx = 0; idx < a.size(); ++idx) {
      const double d = (c[idx] - a[idx]) / dz;
      gz += d * d;
    }
    gz *= cell;
    energy += w * (0.5 * (gx[l] + gx[l + 1]) + gz);
  }
  return energy;
}

}  // namespace sqg
