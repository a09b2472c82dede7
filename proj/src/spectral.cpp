#include "sqg/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace sqg {

namespace {

// FFTW plan creation is not thread-safe, and plans are reusable, so keep a
// small registry keyed by N. Plans are created FFTW_UNALIGNED so they can
// execute on std::vector storage via the new-array interface, which is
// thread-safe once the plan exists.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache c;
    return c;
  }

  struct Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
  };

  Plans get(int n) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    std::vector<cplx> a(static_cast<size_t>(n) * n), b(a.size());
    auto* pa = reinterpret_cast<fftw_complex*>(a.data());
    auto* pb = reinterpret_cast<fftw_complex*>(b.data());
    Plans p;
    p.forward = fftw_plan_dft_2d(n, n, pa, pb, FFTW_FORWARD,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.backward = fftw_plan_dft_2d(n, n, pa, pb, FFTW_BACKWARD,
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_[n] = p;
    return p;
  }

 private:
  std::mutex mu_;
  std::map<int, Plans> plans_;
};

}  // namespace

SpectralField forward_transform(const PhysicalField& f) {
  if (f.grid.n == 0 || f.values.size() != static_cast<size_t>(f.grid.size()))
    throw std::invalid_argument("forward_transform: field/grid size mismatch");
  if (!all_finite(f))
    throw std::invalid_argument("forward_transform: non-finite sample");
  const int n = f.grid.n;
  std::vector<cplx> in(f.values.begin(), f.values.end());
  SpectralField out(f.grid);
  auto plans = PlanCache::instance().get(n);
  fftw_execute_dft(plans.forward, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.coeff.data()));
  const double scale = 1.0 / f.grid.size();
  for (cplx& c : out.coeff) c *= scale;
  return out;
}

PhysicalField inverse_transform(const SpectralField& f) {
  if (f.grid.n == 0 || f.coeff.size() != static_cast<size_t>(f.grid.size()))
    throw std::invalid_argument("inverse_transform: field/grid size mismatch");
  if (!all_finite(f))
    throw std::invalid_argument("inverse_transform: non-finite coefficient");
  const int n = f.grid.n;
  std::vector<cplx> in = f.coeff, out(in.size());
  auto plans = PlanCache::instance().get(n);
  fftw_execute_dft(plans.backward, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  PhysicalField res(f.grid);
  for (size_t i = 0; i < out.size(); ++i) res.values[i] = out[i].real();
  return res;
}

SpectralField fractional_laplacian(const SpectralField& theta, double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("fractional_laplacian: alpha must lie in (0, 1]");
  const int n = theta.grid.n;
  const double ku = theta.grid.wavenumber_unit();
  SpectralField out(theta.grid);
  for (int i = 0; i < n; ++i) {
    const double kx = ku * theta.grid.mode_of(i);
    for (int j = 0; j < n; ++j) {
      const double ky = ku * theta.grid.mode_of(j);
      const double k2 = kx * kx + ky * ky;
      out.at(i, j) = k2 == 0.0 ? cplx{} : theta.at(i, j) * std::pow(k2, alpha);
    }
  }
  return out;
}

SpectralField derivative(const SpectralField& theta, int axis) {
  if (axis != 0 && axis != 1) throw std::invalid_argument("derivative: axis must be 0 or 1");
  const int n = theta.grid.n;
  const double ku = theta.grid.wavenumber_unit();
  SpectralField out(theta.grid);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int m = axis == 0 ? theta.grid.mode_of(i) : theta.grid.mode_of(j);
      // The Nyquist mode has an ambiguous derivative sign; drop it.
      const double k = (std::abs(m) == n / 2) ? 0.0 : ku * m;
      out.at(i, j) = theta.at(i, j) * cplx(0.0, k);
    }
  }
  return out;
}

double sobolev_seminorm(const SpectralField& theta, double alpha) {
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("sobolev_seminorm: alpha must lie in [0, 1]");
  const int n = theta.grid.n;
  const double ku = theta.grid.wavenumber_unit();
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double kx = ku * theta.grid.mode_of(i);
    for (int j = 0; j < n; ++j) {
      const double ky = ku * theta.grid.mode_of(j);
      const double k2 = kx * kx + ky * ky;
      if (k2 == 0.0) continue;
      s += std::pow(k2, alpha) * std::norm(theta.at(i, j));
    }
  }
  return theta.grid.length * std::sqrt(s);
}

SpectralField dealias(const SpectralField& theta) {
  const int n = theta.grid.n;
  const int keep = n / 3;  // retain integer modes with |k_i| <= floor(N/3)
  SpectralField out = theta;
  for (int i = 0; i < n; ++i) {
    const int mi = std::abs(theta.grid.mode_of(i));
    for (int j = 0; j < n; ++j) {
      const int mj = std::abs(theta.grid.mode_of(j));
      if (mi > keep || mj > keep) out.at(i, j) = cplx{};
    }
  }
  return out;
}

MultiplierTable::MultiplierTable(const Grid& g, const Generator& gen) : grid_(g) {
  const int n = g.n;
  m1_.assign(g.size(), cplx{});
  m2_.assign(g.size(), cplx{});
  const double ku = g.wavenumber_unit();
  for (int i = 0; i < n; ++i) {
    const double kx = ku * g.mode_of(i);
    for (int j = 0; j < n; ++j) {
      const double ky = ku * g.mode_of(j);
      if (kx == 0.0 && ky == 0.0) continue;
      auto m = gen(kx, ky);
      const double div = std::abs(kx * m[0] + ky * m[1]);
      const double mag = std::max(std::abs(m[0]), std::abs(m[1]));
      if (div > 1e-12 * std::max(1.0, mag * std::hypot(kx, ky)))
        throw std::invalid_argument(
            "MultiplierTable: generator is not divergence-free (k . m(k) != 0)");
      m1_[idx(i, j)] = m[0];
      m2_[idx(i, j)] = m[1];
    }
  }
}

std::array<SpectralField, 2> riesz_velocity_spectrum(const SpectralField& theta,
                                                     VelocityLaw law,
                                                     const MultiplierTable* table) {
  const Grid& g = theta.grid;
  const int n = g.n;
  SpectralField u1(g), u2(g);
  if (law == VelocityLaw::custom) {
    if (table == nullptr || !(table->grid() == g))
      throw std::invalid_argument("riesz_velocity: custom law needs a table on the same grid");
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        auto m = table->at(i, j);
        u1.at(i, j) = m[0] * theta.at(i, j);
        u2.at(i, j) = m[1] * theta.at(i, j);
      }
  } else {
    const double ku = g.wavenumber_unit();
    for (int i = 0; i < n; ++i) {
      const int mi = g.mode_of(i);
      const double kx = (std::abs(mi) == n / 2) ? 0.0 : ku * mi;
      for (int j = 0; j < n; ++j) {
        const int mj = g.mode_of(j);
        const double ky = (std::abs(mj) == n / 2) ? 0.0 : ku * mj;
        const double kk = std::hypot(kx, ky);
        if (kk == 0.0) continue;
        const cplx t = theta.at(i, j);
        u1.at(i, j) = cplx(0.0, -ky / kk) * t;
        u2.at(i, j) = cplx(0.0, kx / kk) * t;
      }
    }
  }
  return {std::move(u1), std::move(u2)};
}

VelocityField riesz_velocity(const SpectralField& theta, VelocityLaw law,
                             const MultiplierTable* table) {
  auto uh = riesz_velocity_spectrum(theta, law, table);
  VelocityField u(theta.grid);
  u.u1 = inverse_transform(uh[0]);
  u.u2 = inverse_transform(uh[1]);
  return u;
}

double evaluate_at(const SpectralField& theta, double x, double y) {
  const Grid& g = theta.grid;
  const int n = g.n;
  const double ku = g.wavenumber_unit();
  // Factorized mode sum: cache e^{i k x} per axis, skip empty rows.
  std::vector<cplx> ex(n), ey(n);
  for (int i = 0; i < n; ++i) {
    ex[i] = std::polar(1.0, ku * g.mode_of(i) * x);
    ey[i] = std::polar(1.0, ku * g.mode_of(i) * y);
  }
  cplx s{};
  for (int i = 0; i < n; ++i) {
    cplx row{};
    bool any = false;
    for (int j = 0; j < n; ++j) {
      const cplx c = theta.at(i, j);
      if (c == cplx{}) continue;
      row += c * ey[j];
      any = true;
    }
    if (any) s += row * ex[i];
  }
  return s.real();
}

double box_average(const SpectralField& theta, double cx, double cy, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("box_average: half-width must be positive");
  const Grid& g = theta.grid;
  const int n = g.n;
  const double ku = g.wavenumber_unit();
  auto sinc = [](double t) { return t == 0.0 ? 1.0 : std::sin(t) / t; };
  std::vector<cplx> ex(n), ey(n);
  std::vector<double> fx(n), fy(n);
  for (int i = 0; i < n; ++i) {
    const double k = ku * g.mode_of(i);
    ex[i] = std::polar(1.0, k * cx);
    ey[i] = std::polar(1.0, k * cy);
    fx[i] = sinc(k * h);
    fy[i] = fx[i];
  }
  cplx s{};
  for (int i = 0; i < n; ++i) {
    cplx row{};
    bool any = false;
    for (int j = 0; j < n; ++j) {
      const cplx c = theta.at(i, j);
      if (c == cplx{}) continue;
      row += c * fy[j] * ey[j];
      any = true;
    }
    if (any) s += row * fx[i] * ex[i];
  }
  return s.real();
}

}  // namespace sqg
