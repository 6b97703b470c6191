#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "doctest.h"
#include "utm/function_spaces.hpp"

using namespace utm;

namespace {

const Grid& plane_grid() {
  static const Grid g = Grid::make(20.0, 64, 10.0, 65, 1.0, 33);
  return g;
}

// Whole-line x2 box [-L2, L2).
GridField plane_field(const std::function<cd(double, double)>& f) {
  const Grid& g = plane_grid();
  GridField out({g.x1_axis(), g.x2_whole_axis()});
  const Axis ax2 = g.x2_whole_axis();
  for (std::size_t i = 0; i < g.N1; ++i)
    for (std::size_t j = 0; j < ax2.n; ++j) out(i, j) = f(g.x1(i), ax2.node(j));
  return out;
}

Axis t_axis(double t0, double t1, std::size_t n) { return Axis{AxisTag::t, n, t0, (t1 - t0) / double(n - 1)}; }

GridField xt_field(const Axis& t, const std::function<cd(double, double)>& f) {
  const Grid& g = plane_grid();
  GridField out({g.x1_axis(), t});
  for (std::size_t i = 0; i < g.N1; ++i)
    for (std::size_t k = 0; k < t.n; ++k) out(i, k) = f(g.x1(i), t.node(k));
  return out;
}

GridField random_gaussian_packet(unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const double c1 = 2 * U(rng), c2 = 2 * U(rng), v1 = 2 * U(rng), v2 = 2 * U(rng);
  const cd amp(U(rng), U(rng));
  return plane_field([=](double x1, double x2) {
    return amp * std::exp(cd(-(x1 - c1) * (x1 - c1) - (x2 - c2) * (x2 - c2), v1 * x1 + v2 * x2));
  });
}

// x1-Gaussian profile supported strictly inside (0, 1/2) in t.
cd inner_datum(double x1, double t) {
  const double s = (t - 0.25) / 0.2;
  const double bump = std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
  return std::exp(cd(-x1 * x1, x1 + 4.0 * t)) * bump;
}

// Trapezoid L2 on (x1, x2 >= 0), endpoints at half weight in x2.
double halfplane_l2(const GridField& f) {
  const std::size_t N1 = f.dim(0), N2 = f.dim(1);
  double s = 0.0;
  for (std::size_t i = 0; i < N1; ++i)
    for (std::size_t j = 0; j < N2; ++j) s += (j == 0 || j + 1 == N2 ? 0.5 : 1.0) * std::norm(f(i, j));
  return std::sqrt(s * f.axes[0].step * f.axes[1].step);
}

}  // namespace

TEST_CASE("plane norm of zero is zero") {
  CHECK(sobolev_norm_plane(plane_field([](double, double) { return cd(0.0); }), 1.3) == 0.0);
}

TEST_CASE("plane norm with s = 0 is the L2 norm") {
  const GridField f = random_gaussian_packet(1);
  CHECK(std::abs(sobolev_norm_plane(f, 0.0) - f.l2()) <= 1e-12 * f.l2());
}

TEST_CASE("plane H^1 norm of exp(-|x|^2/2) is sqrt(2 pi)") {
  const GridField f = plane_field([](double x1, double x2) { return cd(std::exp(-(x1 * x1 + x2 * x2) / 2.0)); });
  CHECK(std::abs(sobolev_norm_plane(f, 1.0) - std::sqrt(2.0 * pi)) <= 1e-10);
}

TEST_CASE("half-plane norm") {
  const Grid& g = plane_grid();
  SUBCASE("zero") { CHECK(sobolev_norm_halfplane(zeros({g.x1_axis(), g.x2_axis()}), 1.0) == 0.0); }
  SUBCASE("even reflection at s = 0 doubles the squared L2 norm") {
    const GridField f = sample([](double x1, double x2, double) { return std::exp(cd(-x1 * x1 - (x2 - 1) * (x2 - 1), x1)); },
                               g, {AxisTag::x1, AxisTag::x2});
    CHECK(std::abs(sobolev_norm_halfplane(f, 0.0) - std::sqrt(2.0) * halfplane_l2(f)) <= 1e-12 * halfplane_l2(f));
    // zero extension is rough across x2 = 0; even reflection is not
    CHECK(sobolev_norm_halfplane(f, 1.0, HalfplaneExtension::zero) >= sobolev_norm_halfplane(f, 1.0) / std::sqrt(2.0));
  }
  SUBCASE("even reflection stops at s = 3/2") {
    CHECK_THROWS_AS(sobolev_norm_halfplane(zeros({g.x1_axis(), g.x2_axis()}), 1.5), Error);
  }
}

TEST_CASE("Bourgain norm with sigma = b = 0 is the L2 norm") {
  const GridField g = xt_field(t_axis(-6.0, 6.0, 193), [](double x1, double t) {
    return std::exp(cd(-x1 * x1 - t * t, 0.5 * x1 - t));
  });
  const double v = bourgain_norm(g, 0.0, 0.0).value;
  CHECK(std::abs(v - g.l2()) <= 1e-10 * g.l2());
}

TEST_CASE("Bourgain norm of exp(-x1^2 - t^2) matches direct quadrature") {
  const GridField g = xt_field(t_axis(-6.0, 6.0, 193), [](double x1, double t) { return cd(std::exp(-x1 * x1 - t * t)); });
  using boost::math::quadrature::gauss_kronrod;
  for (const auto& [sigma, b] : std::vector<std::pair<double, double>>{{1.0, 0.5}, {0.5, -0.25}, {0.0, 0.375}}) {
    // |g^|^2 = pi^2 e^{-(k1^2 + tau^2)/2}; Plancherel brings 1/(4 pi^2).
    auto inner = [&](double k1) {
      return gauss_kronrod<double, 61>::integrate(
          [&](double tau) {
            const double m = tau + k1 * k1;
            return std::pow(1 + k1 * k1, sigma) * std::pow(1 + m * m, b) * std::exp(-(k1 * k1 + tau * tau) / 2.0);
          },
          -40.0, 40.0, 10, 1e-13);
    };
    const double I = gauss_kronrod<double, 61>::integrate(inner, -12.0, 12.0, 10, 1e-12);
    const double ref = std::sqrt(I / 4.0);
    CAPTURE(sigma);
    CAPTURE(b);
    CHECK(std::abs(bourgain_norm(g, sigma, b).value - ref) <= 1e-6 * ref);
  }
}

TEST_CASE("homogeneous weight with b = 0 agrees with the plain weight") {
  const GridField g = xt_field(t_axis(-6.0, 6.0, 97), [](double x1, double t) { return cd(std::exp(-x1 * x1 - t * t)); });
  CHECK(std::abs(bourgain_norm(g, 0.7, 0.0, true).value - bourgain_norm(g, 0.7, 0.0).value) <= 1e-14);
}

TEST_CASE("extension of the boundary datum") {
  const Axis t = t_axis(0.0, 0.5, 17);
  const GridField psi = xt_field(t, [](double x1, double tt) { return std::exp(cd(-x1 * x1, tt)); });
  const std::size_t off = std::size_t(std::lround(1.0 / t.step));
  ExtensionPolicy zero, cut;
  cut.mode = ExtensionMode::cutoff_extension;

  SUBCASE("zero datum stays zero") {
    CHECK(extend_boundary_datum(zeros(psi.axes), cut).max_abs() == 0.0);
    CHECK(extend_boundary_datum(zeros(psi.axes), zero).max_abs() == 0.0);
  }
  SUBCASE("layout and restriction") {
    const GridField h = extend_boundary_datum(psi, zero);
    CHECK(h.axes[1].origin == doctest::Approx(-1.0));
    CHECK(h.axes[1].step == t.step);
    CHECK(h.dim(1) % 2 == 1);
    for (std::size_t i = 0; i < psi.dim(0); ++i) {
      for (std::size_t k = 0; k < t.n; ++k) CHECK(h(i, k + off) == psi(i, k));
      CHECK(h(i, off - 1) == cd(0.0));
      CHECK(h(i, off + t.n) == cd(0.0));
    }
  }
  SUBCASE("cutoff equals zero extension on (0, T)") {
    const GridField a = extend_boundary_datum(psi, zero), b = extend_boundary_datum(psi, cut);
    double d = 0.0;
    for (std::size_t i = 0; i < psi.dim(0); ++i)
      for (std::size_t k = 0; k < t.n; ++k) d = std::max(d, std::abs(a(i, k + off) - b(i, k + off)));
    CHECK(d <= 1e-12 * psi.max_abs());
  }
}

TEST_CASE("cutoff profile is one on [0, 2] and vanishes outside (-1, 3)") {
  for (double t : {0.0, 0.5, 2.0}) CHECK(cutoff_profile(t) == 1.0);
  for (double t : {-1.0, -2.0, 3.0, 3.5}) CHECK(cutoff_profile(t) == 0.0);
  CHECK(cutoff_profile(-0.5) > 0.0);
  CHECK(cutoff_profile(-0.5) < 1.0);
}

TEST_CASE("boundary space norm") {
  const Axis t = t_axis(0.0, 0.5, 17);
  SUBCASE("zero") { CHECK(bts_norm(zeros({plane_grid().x1_axis(), t}), 1.0).value == 0.0); }
  SUBCASE("s = 1/2 splits into the L2 norm plus the X^{s,-1/4} norm of the extension") {
    const GridField psi = xt_field(t, inner_datum);
    const GridField h = extend_boundary_datum(psi, {});
    const double l2 = bourgain_norm(h, 0.0, 0.0).value;
    CHECK(std::abs(l2 - h.l2()) <= 1e-10 * l2);
    const double second = bourgain_norm(h, 0.5, -0.25).value;
    CHECK(std::abs(bts_norm(psi, 0.5).value - (l2 + second)) <= 1e-12 * (l2 + second));
  }
  SUBCASE("data supported inside (0, T) give the same value under both policies") {
    const GridField psi = xt_field(t, inner_datum);
    ExtensionPolicy cut;
    cut.mode = ExtensionMode::cutoff_extension;
    const double a = bts_norm(psi, 1.0).value, b = bts_norm(psi, 1.0, cut).value;
    CHECK(std::abs(a - b) <= 1e-12 * a);
  }
}

TEST_CASE("kernel ratio is invariant under scaling of (k1, k2)") {
  for (double beta : {0.25, 0.5, 0.75}) {
    const double r = kernel_bound_check(1.0, 1.0, beta).ratio;
    for (double lam : {0.5, 2.0}) {
      CAPTURE(beta);
      CHECK(std::abs(kernel_bound_check(lam, lam, beta).ratio - r) <= 1e-3 * r);
    }
  }
}

TEST_CASE("kernel with k2 = 0, k1 = 1, beta = 1/2 is finite") {
  const KernelBound kb = kernel_bound_check(1.0, 0.0, 0.5);
  CHECK(std::isfinite(kb.value));
  CHECK(kb.value > 0.0);
  CHECK(kb.ratio == doctest::Approx(kb.value));
  CHECK(kb.error_estimate <= 1e-6 * kb.value);
}

TEST_CASE("norms are absolutely homogeneous and satisfy the triangle inequality") {
  const cd lam(-1.7, 0.4);
  for (unsigned seed : {2u, 3u, 4u}) {
    const GridField f = random_gaussian_packet(seed), g = random_gaussian_packet(seed + 10);
    for (double s : {0.0, 0.8, 1.4}) {
      const double nf = sobolev_norm_plane(f, s), ng = sobolev_norm_plane(g, s);
      CHECK(std::abs(sobolev_norm_plane(lam * f, s) - std::abs(lam) * nf) <= 1e-12 * std::abs(lam) * nf);
      CHECK(sobolev_norm_plane(f + g, s) <= nf + ng + 1e-12);
    }
  }
  const Axis t = t_axis(-6.0, 6.0, 97);
  const GridField a = xt_field(t, [](double x1, double tt) { return std::exp(cd(-x1 * x1 - tt * tt, x1)); });
  const GridField b = xt_field(t, [](double x1, double tt) { return std::exp(cd(-x1 * x1 - (tt - 1) * (tt - 1), -tt)); });
  const double na = bourgain_norm(a, 1.0, -0.25).value, nb = bourgain_norm(b, 1.0, -0.25).value;
  CHECK(std::abs(bourgain_norm(lam * a, 1.0, -0.25).value - std::abs(lam) * na) <= 1e-12 * std::abs(lam) * na);
  CHECK(bourgain_norm(a + b, 1.0, -0.25).value <= na + nb + 1e-12);
}
