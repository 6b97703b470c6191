#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "doctest.h"
#include "utm/core_model.hpp"
#include "utm/scenarios.hpp"
#include "utm/transforms.hpp"

using namespace utm;

namespace {

GridField random_field(const std::vector<Axis>& axes, unsigned seed, bool real = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N;
  GridField f(axes);
  for (auto& v : f.values) v = cd(N(rng), real ? 0.0 : N(rng));
  return f;
}

}  // namespace

TEST_CASE("x1 transform of zero is zero") {
  const Grid grid = Grid::make(20.0, 64, 20.0, 65, 0.5, 33);
  CHECK(fourier_x1(zeros({grid.x1_axis(), grid.x2_axis()})).max_abs() == 0.0);
}

TEST_CASE("x1 transform of a Gaussian matches the closed form") {
  const Grid grid = Grid::make(20.0, 64, 20.0, 65, 0.5, 33);
  const GridField f = sample([](double x1, double, double) { return cd(std::exp(-x1 * x1)); }, grid, {AxisTag::x1});
  const GridField F = fourier_x1(f);
  REQUIRE(F.axes[0].tag == AxisTag::k1);
  double err = 0.0;
  for (std::size_t m = 0; m < grid.N1; ++m) {
    const double k = grid.k1(m);
    err = std::max(err, std::abs(F.values[m] - std::sqrt(pi) * std::exp(-k * k / 4.0)));
  }
  CHECK(err / std::sqrt(pi) < 1e-10);
}

TEST_CASE("inverse x1 transform undoes the forward one") {
  const Grid grid = Grid::make(20.0, 64, 20.0, 17, 0.5, 9);
  const GridField f = random_field({grid.x1_axis(), grid.x2_axis(), grid.t_axis()}, 11);
  const GridField back = inverse_fourier_x1(fourier_x1(f));
  CHECK((back - f).max_abs() < 1e-12 * f.max_abs());
}

TEST_CASE("x1 transform obeys Plancherel with factor sqrt(2 pi)") {
  const Grid grid = Grid::make(20.0, 64, 20.0, 17, 0.5, 9);
  for (unsigned seed : {1u, 2u, 3u}) {
    const GridField f = random_field({grid.x1_axis(), grid.x2_axis()}, seed);
    const double a = fourier_x1(f).l2(), b = std::sqrt(2.0 * pi) * f.l2();
    CHECK(std::abs(a - b) < 1e-10 * b);
  }
}

TEST_CASE("half-plane transform of zero is zero") {
  const Grid grid = Grid::make(20.0, 32, 20.0, 65, 0.5, 33);
  const SpectralField S = halfplane_fourier(zeros({grid.x1_axis(), grid.x2_axis()}), {cd(1.0, -0.5), cd(0.0, -1.0)});
  for (const cd& v : S.values) CHECK(v == cd(0.0));
}

TEST_CASE("half-plane transform of exp(-x2) at k2 = -i gives 1/2") {
  const Grid grid = Grid::make(20.0, 64, 40.0, 257, 0.5, 33);
  const GridField f =
      sample([](double x1, double x2, double) { return cd(std::exp(-x1 * x1 - x2)); }, grid, {AxisTag::x1, AxisTag::x2});
  const SpectralField S = halfplane_fourier(f, {cd(0.0, -1.0)});
  const std::size_t m0 = grid.N1 / 2;  // k1 = 0
  REQUIRE(S.k1[m0] == 0.0);
  CHECK(std::abs(S.at(m0, 0) - std::sqrt(pi) * 0.5) < 1e-10);
}

TEST_CASE("half-plane transform at real k2 matches adaptive quadrature") {
  // Degree-8 panels need h2 well below the Gaussian width here: h2 = 0.3125 leaves 6e-5.
  const Grid grid = Grid::make(20.0, 64, 20.0, 257, 0.5, 33);
  const GridField f = sample([](double x1, double x2, double) { return cd(std::exp(-x1 * x1 - x2 * x2)); }, grid,
                             {AxisTag::x1, AxisTag::x2});
  const std::vector<cd> ks{0.0, 0.7, 2.5, 6.0};
  const SpectralField S = halfplane_fourier(f, ks);
  const std::size_t m0 = grid.N1 / 2;
  for (std::size_t z = 0; z < ks.size(); ++z) {
    const double k = ks[z].real();
    using boost::math::quadrature::gauss_kronrod;
    const double re = gauss_kronrod<double, 61>::integrate(
        [&](double x) { return std::cos(k * x) * std::exp(-x * x); }, 0.0, 12.0, 15, 1e-14);
    const double im = gauss_kronrod<double, 61>::integrate(
        [&](double x) { return -std::sin(k * x) * std::exp(-x * x); }, 0.0, 12.0, 15, 1e-14);
    CHECK(std::abs(S.at(m0, z) - std::sqrt(pi) * cd(re, im)) < 1e-8);
  }
}

TEST_CASE("half-plane transform stays finite for Im k2 < 0") {
  const Grid grid = Grid::make(20.0, 64, 20.0, 65, 0.5, 33);
  const GridField f = sample([](double x1, double x2, double) { return cd(std::exp(-x1 * x1 - (x2 - 5) * (x2 - 5))); },
                             grid, {AxisTag::x1, AxisTag::x2});
  const SpectralField S = halfplane_fourier(f, {cd(3.0, -4.0), cd(0.0, -8.0), cd(-5.0, -0.1)});
  for (const cd& v : S.values) CHECK(std::isfinite(std::abs(v)));
}

TEST_CASE("time transform of zero is zero") {
  const Grid grid = Grid::make(20.0, 32, 20.0, 65, 1.0, 33);
  CHECK(time_transform(zeros({grid.x1_axis(), grid.t_axis()}), 0.5, cd(2.0, 0.1), 1.0) == cd(0.0));
}

TEST_CASE("time transform of exp(-x1^2) on [0, 1] at k1 = 0, omega = 0") {
  const Grid grid = Grid::make(20.0, 64, 20.0, 65, 1.0, 33);
  const GridField g = sample([](double x1, double, double) { return cd(std::exp(-x1 * x1)); }, grid,
                             {AxisTag::x1, AxisTag::t});
  CHECK(std::abs(time_transform(g, 0.0, 0.0, 1.0) - std::sqrt(pi)) < 1e-12);
}

TEST_CASE("time transform with vanishing exponent is the plain time integral") {
  const Grid grid = Grid::make(20.0, 64, 20.0, 65, 1.0, 33);
  const GridField g = sample([](double x1, double, double t) { return std::exp(cd(-x1 * x1 - t, 2.0 * x1 + t * t)); },
                             grid, {AxisTag::x1, AxisTag::t});
  const double k1 = grid.k1(35);
  const std::vector<cd> gh = fourier_x1_at(g, k1);
  using boost::math::quadrature::gauss_kronrod;
  // Closed form in x1 of the sampled profile: sqrt(pi) e^{-(k1-2)^2/4}, times e^{-t + i t^2}.
  const cd ref = std::sqrt(pi) * std::exp(-(k1 - 2.0) * (k1 - 2.0) / 4.0) *
                 cd(gauss_kronrod<double, 61>::integrate([](double t) { return std::exp(-t) * std::cos(t * t); }, 0, 1),
                    gauss_kronrod<double, 61>::integrate([](double t) { return std::exp(-t) * std::sin(t * t); }, 0, 1));
  CHECK(std::abs(gh[0] - std::sqrt(pi) * std::exp(-(k1 - 2.0) * (k1 - 2.0) / 4.0)) < 1e-10);
  CHECK(std::abs(time_transform(g, k1, 0.0, 1.0) - ref) < 1e-9);
}

// With the kernel e^{i omega t}, real g gives g~(-k1, -conj(omega)) = conj(g~(k1, omega)).
TEST_CASE("time transform is conjugate-symmetric for real data") {
  const Grid grid = Grid::make(20.0, 32, 20.0, 65, 1.0, 17);
  const GridField g = random_field({grid.x1_axis(), grid.t_axis()}, 9, true);
  for (const auto& [k1, w] : std::vector<std::pair<double, cd>>{{0.7, cd(1.5, 0.2)}, {-2.1, cd(-3.0, 0.0)}}) {
    const cd a = time_transform(g, -k1, -std::conj(w), 1.0);
    const cd b = std::conj(time_transform(g, k1, w, 1.0));
    CHECK(std::abs(a - b) < 1e-12 * std::max(1.0, std::abs(b)));
  }
}

TEST_CASE("time transform is linear") {
  const Grid grid = Grid::make(20.0, 32, 20.0, 65, 1.0, 17);
  const GridField a = random_field({grid.x1_axis(), grid.t_axis()}, 3), b = random_field({grid.x1_axis(), grid.t_axis()}, 4);
  const cd w(2.0, 0.3), c(0.5, -1.5);
  const cd lhs = time_transform(a + c * b, 1.1, w, 1.0);
  const cd rhs = time_transform(a, 1.1, w, 1.0) + c * time_transform(b, 1.1, w, 1.0);
  CHECK(std::abs(lhs - rhs) < 1e-12 * std::abs(rhs));
}

TEST_CASE("Laplace transform of zero is zero") {
  std::vector<double> k(101), phi(101, 0.0);
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = 0.1 * double(i);
  for (double v : laplace_halfline(k, phi, {0.0, 1.0, 5.0})) CHECK(v == 0.0);
}

TEST_CASE("Laplace transform of exp(-k) is 1/(1+x)") {
  std::vector<double> k(4001), phi(4001);
  for (std::size_t i = 0; i < k.size(); ++i) {
    k[i] = 0.01 * double(i);
    phi[i] = std::exp(-k[i]);
  }
  phi.back() = 0.0;
  const std::vector<double> x{0.0, 0.5, 1.0, 3.0, 10.0};
  const std::vector<double> L = laplace_halfline(k, phi, x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(L[i] - 1.0 / (1.0 + x[i])) < 1e-5);
}

TEST_CASE("Laplace transform rejects data that has not decayed") {
  std::vector<double> k(11), phi(11, 1.0);
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = double(i);
  CHECK_THROWS_AS(laplace_halfline(k, phi, {1.0}), Error);
}

TEST_CASE("Laplace L2 ratio stays below sqrt(pi) over random nonnegative data") {
  const LaplaceStudy st = laplace_study(100, 42);
  CHECK(st.ratios.size() == 100);
  CHECK(st.max_ratio <= std::sqrt(pi) + 1e-3);
  CHECK(st.witness_ratio >= 0.9 * std::sqrt(pi));
}
