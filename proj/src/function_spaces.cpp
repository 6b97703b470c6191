#include "utm/function_spaces.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>

#include "utm/fft.hpp"
#include "utm/quadrature.hpp"
#include "utm/transforms.hpp"

namespace utm {

const char* norm_kind_name(NormKind k) {
  switch (k) {
    case NormKind::sobolev_plane: return "sobolev_plane";
    case NormKind::sobolev_halfplane: return "sobolev_halfplane";
    case NormKind::bourgain: return "bourgain";
    case NormKind::bourgain_restricted: return "bourgain_restricted";
    case NormKind::bourgain_homogeneous: return "bourgain_homogeneous";
    case NormKind::bts: return "bts";
  }
  return "?";
}

const char* extension_name(ExtensionMode m) {
  return m == ExtensionMode::zero_extension ? "zero_extension" : "cutoff_extension";
}

nlohmann::json NormReport::to_json() const {
  return {{"kind", norm_kind_name(kind)},
          {"exponents", exponents},
          {"value", value},
          {"policy", policy},
          {"excluded_mass", excluded_mass}};
}

namespace {

double dft_wavenumber(std::size_t q, std::size_t n, double h) {
  return 2.0 * pi / (double(n) * h) * (q < n / 2 ? double(q) : double(q) - double(n));
}

void check_edges_2d(const std::vector<cd>& v, std::size_t n0, std::size_t n1, double floor, const char* what) {
  if (floor <= 0.0) return;
  double m = 0.0, e = 0.0;
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j) {
      const double a = std::abs(v[i * n1 + j]);
      m = std::max(m, a);
      if (i == 0 || i + 1 == n0 || j == 0 || j + 1 == n1) e = std::max(e, a);
    }
  if (m > 0.0 && e > floor * m) throw Error(ErrorCode::EdgeDecay, std::string(what) + " does not decay at the box edges");
}

double weighted_plane_sum(std::vector<cd> a, std::size_t n1, std::size_t n2, double h1, double h2, double s) {
  fft_axis(a, {n1, n2}, 0, -1);
  fft_axis(a, {n1, n2}, 1, -1);
  double sum = 0.0;
  for (std::size_t i = 0; i < n1; ++i) {
    const double k1 = dft_wavenumber(i, n1, h1);
    for (std::size_t j = 0; j < n2; ++j) {
      const double k2 = dft_wavenumber(j, n2, h2);
      const double w = s == 0.0 ? 1.0 : std::pow(1.0 + k1 * k1 + k2 * k2, s);
      sum += w * std::norm(a[i * n2 + j]);
    }
  }
  return std::sqrt(sum * h1 * h2 / (double(n1) * double(n2)));
}

}  // namespace

double sobolev_norm_plane(const GridField& f, double s, double edge_floor) {
  if (f.rank() != 2 || f.axes[0].tag != AxisTag::x1 || f.axes[1].tag != AxisTag::x2)
    throw Error(ErrorCode::AxisMismatch, "sobolev_norm_plane needs (x1, x2)");
  f.require_finite("sobolev_norm_plane");
  check_edges_2d(f.values, f.dim(0), f.dim(1), edge_floor, "field");
  return weighted_plane_sum(f.values, f.dim(0), f.dim(1), f.axes[0].step, f.axes[1].step, s);
}

double sobolev_norm_halfplane(const GridField& f, double s, HalfplaneExtension ext, double edge_floor) {
  if (f.rank() != 2 || f.axes[0].tag != AxisTag::x1 || f.axes[1].tag != AxisTag::x2 || f.axes[1].origin != 0.0)
    throw Error(ErrorCode::AxisMismatch, "sobolev_norm_halfplane needs (x1, x2 >= 0)");
  if (ext == HalfplaneExtension::even_reflection && s >= 1.5)
    throw Error(ErrorCode::RangeS, "even reflection keeps H^s only for s < 3/2");
  f.require_finite("sobolev_norm_halfplane");
  const std::size_t N1 = f.dim(0), N2 = f.dim(1), M2 = 2 * (N2 - 1);
  if (edge_floor > 0.0 && edge_ratio(f) > edge_floor)
    throw Error(ErrorCode::EdgeDecay, "field does not decay at the box edges");
  std::vector<cd> w(N1 * M2, cd(0.0));
  for (std::size_t i = 0; i < N1; ++i)
    for (std::size_t q = 0; q < M2; ++q) {
      if (ext == HalfplaneExtension::even_reflection) {
        const std::size_t j = q >= N2 - 1 ? q - (N2 - 1) : (N2 - 1) - q;
        w[i * M2 + q] = f.values[i * N2 + j];
      } else if (q >= N2 - 1) {
        w[i * M2 + q] = f.values[i * N2 + q - (N2 - 1)];
      }
    }
  return weighted_plane_sum(std::move(w), N1, M2, f.axes[0].step, f.axes[1].step, s);
}

NormReport bourgain_norm(const GridField& g, double sigma, double b, bool homogeneous, double edge_floor) {
  if (g.rank() != 2 || g.axes[0].tag != AxisTag::x1 || g.axes[1].tag != AxisTag::t)
    throw Error(ErrorCode::AxisMismatch, "bourgain_norm needs (x1, t)");
  g.require_finite("bourgain_norm");
  const std::size_t N1 = g.dim(0), nt = g.dim(1);
  check_edges_2d(g.values, N1, nt, edge_floor, "boundary field");
  std::size_t np = 1;
  while (np < 4 * nt) np *= 2;
  std::vector<cd> a(N1 * np, cd(0.0));
  for (std::size_t i = 0; i < N1; ++i)
    for (std::size_t k = 0; k < nt; ++k) a[i * np + k] = g.values[i * nt + k];
  fft_axis(a, {N1, np}, 0, -1);
  fft_axis(a, {N1, np}, 1, -1);
  const double h1 = g.axes[0].step, dt = g.axes[1].step;
  double sum = 0.0, excluded = 0.0;
  for (std::size_t i = 0; i < N1; ++i) {
    const double k1 = dft_wavenumber(i, N1, h1);
    const double ws = sigma == 0.0 ? 1.0 : std::pow(1.0 + k1 * k1, sigma);
    for (std::size_t q = 0; q < np; ++q) {
      const double tau = dft_wavenumber(q, np, dt);
      const double mod = std::abs(tau + k1 * k1);
      const double m2 = std::norm(a[i * np + q]);
      double wt;
      if (homogeneous) {
        if (b < 0.0 && mod < 1e-8) {
          excluded += ws * m2;
          continue;
        }
        wt = b == 0.0 ? 1.0 : std::pow(mod, 2.0 * b);
      } else {
        wt = b == 0.0 ? 1.0 : std::pow(1.0 + mod * mod, b);
      }
      sum += ws * wt * m2;
    }
  }
  const double scale = h1 * dt / (double(N1) * double(np));
  NormReport r;
  r.kind = homogeneous ? NormKind::bourgain_homogeneous : NormKind::bourgain;
  r.exponents = {{"sigma", sigma}, {"b", b}};
  r.value = std::sqrt(sum * scale);
  r.excluded_mass = excluded * scale;
  r.policy = "none";
  return r;
}

double cutoff_profile(double t) {
  if (t >= 0.0 && t <= 2.0) return 1.0;
  if (t <= -1.0 || t >= 3.0) return 0.0;
  return t < 0.0 ? taper(-t) : taper(t - 2.0);
}

GridField extend_boundary_datum(const GridField& psi, const ExtensionPolicy& policy) {
  if (psi.rank() != 2 || psi.axes[0].tag != AxisTag::x1 || psi.axes[1].tag != AxisTag::t)
    throw Error(ErrorCode::AxisMismatch, "extend_boundary_datum needs (x1, t)");
  const Axis& ta = psi.axes[1];
  if (std::abs(ta.origin) > 1e-12) throw Error(ErrorCode::AxisMismatch, "boundary datum must start at t = 0");
  if (ta.last() >= 1.0) throw Error(ErrorCode::HorizonTooLarge, "extension needs T < 1");
  const double dt = ta.step;
  const std::size_t i0 = std::size_t(std::ceil(1.0 / dt - 1e-9));
  std::size_t n = i0 + std::size_t(std::ceil(3.0 / dt - 1e-9)) + 1;
  if (n % 2 == 0) ++n;
  const std::size_t N1 = psi.dim(0);
  GridField h({psi.axes[0], Axis{AxisTag::t, n, -double(i0) * dt, dt}});
  if (policy.mode == ExtensionMode::zero_extension) {
    for (std::size_t i = 0; i < N1; ++i)
      for (std::size_t k = 0; k < ta.n; ++k) h(i, i0 + k) = psi(i, k);
    return h;
  }
  // Per k1 mode: modulate, zero-extend, multiply by the cutoff, un-modulate.
  const GridField P = fourier_x1(psi);
  GridField H({P.axes[0], h.axes[1]});
  for (std::size_t m = 0; m < N1; ++m) {
    const double k1 = P.axes[0].node(m);
    for (std::size_t k = 0; k < ta.n; ++k) {
      const double t = ta.node(k);
      const cd phi = std::exp(cd(0.0, k1 * k1 * t)) * P(m, k);
      H(m, i0 + k) = cutoff_profile(t) * phi * std::exp(cd(0.0, -k1 * k1 * t));
    }
  }
  return inverse_fourier_x1(H);
}

NormReport bts_norm(const GridField& g, double s, const ExtensionPolicy& policy, bool homogeneous) {
  const GridField h = extend_boundary_datum(g, policy);
  const NormReport a = bourgain_norm(h, 0.0, (2.0 * s - 1.0) / 4.0, homogeneous);
  const NormReport b = bourgain_norm(h, s, -0.25, homogeneous);
  NormReport r;
  r.kind = NormKind::bts;
  r.exponents = {{"s", s}, {"first", {{"sigma", 0.0}, {"b", (2.0 * s - 1.0) / 4.0}}}, {"second", {{"sigma", s}, {"b", -0.25}}},
                 {"homogeneous", homogeneous}, {"T", g.axes[1].last()}};
  r.value = a.value + b.value;
  r.excluded_mass = a.excluded_mass + b.excluded_mass;
  r.policy = extension_name(policy.mode);
  return r;
}

namespace {

// e^{z} - 1 without cancellation for small |z|.
cd expm1c(cd z) {
  const double x = z.real(), y = z.imag();
  const double sh = std::sin(0.5 * y);
  return cd(std::expm1(x) * std::cos(y) - 2.0 * sh * sh, std::exp(x) * std::sin(y));
}

// Upper incomplete gamma for s in (-2, 0] by upward recurrence; s = 0 is E1.
double upper_gamma(double s, double x) {
  if (s > 0.0) return boost::math::tgamma(s, x);
  if (s == 0.0) return boost::math::expint(1, x);
  return (upper_gamma(s + 1.0, x) - std::pow(x, s) * std::exp(-x)) / s;
}

// int_0^inf |e^{a r} - 1|^2 r^{-1-2 beta} dr for Re a <= 0.
double radial(cd a, double beta) {
  using boost::math::quadrature::gauss_kronrod;
  const double A = std::abs(a);
  if (A == 0.0) return 0.0;
  const double p = 1.0 + 2.0 * beta;
  auto f = [&](double r) { return std::norm(expm1c(a * r)) * std::pow(r, -p); };
  const double eps = 1e-6 / A;
  double total = A * A * std::pow(eps, 2.0 - 2.0 * beta) / (2.0 - 2.0 * beta);
  auto panel = [&](double lo, double hi) { total += gauss_kronrod<double, 21>::integrate(f, lo, hi, 3, 1e-11); };
  double lo = eps;
  while (lo < 1.0 / A) {
    const double hi = std::min(2.0 * lo, 1.0 / A);
    panel(lo, hi);
    lo = hi;
  }
  const double R = 200.0 / A, step = pi / A;
  while (lo < R - 1e-12 * R) {
    const double hi = std::min(lo + step, R);
    panel(lo, hi);
    lo = hi;
  }
  // Tail: |e^{ar}-1|^2 = e^{2 Re(a) r} + 1 - 2 Re e^{ar}.
  const double alpha = a.real();
  double tail = std::pow(R, -2.0 * beta) / (2.0 * beta);
  if (alpha == 0.0) tail += std::pow(R, -2.0 * beta) / (2.0 * beta);
  else tail += std::pow(-2.0 * alpha, 2.0 * beta) * upper_gamma(-2.0 * beta, -2.0 * alpha * R);
  cd osc = 0.0, term = -std::exp(a * R) * std::pow(R, -p) / a;
  for (int n = 0; n < 8; ++n) {
    osc += term;
    term *= (p + n) / (a * R);
  }
  tail -= 2.0 * osc.real();
  return total + tail;
}

}  // namespace

KernelBound kernel_bound_check(double k1, double k2, double beta) {
  using boost::math::quadrature::gauss_kronrod;
  if (k1 == 0.0 && k2 == 0.0) throw Error(ErrorCode::Config, "kernel bound needs (k1, k2) != (0, 0)");
  if (!(beta > 0.0 && beta < 1.0)) throw Error(ErrorCode::Config, "beta must lie in (0, 1)");
  if (k2 < 0.0) throw Error(ErrorCode::Config, "kernel bound needs k2 >= 0");
  auto J = [&](double phi) {
    const cd a(-k2 * std::sin(phi), k1 * std::cos(phi));
    return radial(a, beta);
  };
  double outer_err = 0.0;
  // J is only Hoelder at phi = pi/2 when k2 = 0, so that point is a panel end.
  double e1 = 0.0, e2 = 0.0;
  const double v = gauss_kronrod<double, 31>::integrate(J, 0.0, 0.5 * pi, 10, 1e-9, &e1) +
                   gauss_kronrod<double, 31>::integrate(J, 0.5 * pi, pi, 10, 1e-9, &e2);
  outer_err = e1 + e2;
  KernelBound kb;
  kb.value = v;
  kb.ratio = v / std::pow(k1 * k1 + k2 * k2, beta);
  kb.error_estimate = outer_err;
  if (!std::isfinite(v) || v <= 0.0 || outer_err > 1e-4 * std::abs(v))
    throw Error(ErrorCode::NonConvergent, "kernel integral did not reach its tolerance");
  return kb;
}

}  // namespace utm
