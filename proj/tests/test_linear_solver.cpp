#include <cmath>
#include <random>

#include "doctest.h"
#include "utm/contours.hpp"
#include "utm/function_spaces.hpp"
#include "utm/linear_solver.hpp"
#include "utm/reference_oracles.hpp"
#include "utm/scenarios.hpp"
#include "utm/transforms.hpp"

using namespace utm;

namespace {

const Grid& grid0() {
  static const Grid g = Grid::make(20.0, 64, 20.0, 65, 0.5, 33);
  return g;
}

double rel_l2(const GridField& a, const GridField& b) { return (a - b).l2() / b.l2(); }

GridField exact_halfplane(const GaussianParams& p, const Grid& grid) {
  return gaussian_free_evolution(p, grid, grid.x2_axis());
}

// Boundary datum supported strictly inside (0, T) in t.
GridField bump_datum(const Grid& grid) {
  return sample(
      [&](double x1, double, double t) {
        return std::exp(cd(-x1 * x1, 1.5 * x1 - 3.0 * t)) * time_bump(t - 0.05 * grid.T, 0.9 * grid.T);
      },
      grid, {AxisTag::x1, AxisTag::t});
}

}  // namespace

TEST_CASE("forced problem with zero data gives zero") {
  for (double gamma : {-1.0, 0.0, 0.5}) {
    ProblemSpec spec;
    spec.gamma = gamma;
    CHECK(solve_forced_ibvp(spec, grid0(), zero_data(grid0(), true)).u.max_abs() <= 1e-12);
  }
}

TEST_CASE("manufactured Gaussian matches the closed-form evolution") {
  const GaussianParams p;
  for (double gamma : {-1.0, 0.0, 0.5}) {
    ProblemSpec spec;
    spec.gamma = gamma;
    const SolutionRecord sol = solve_forced_ibvp(spec, grid0(), gaussian_data(p, grid0(), gamma));
    const double err = rel_l2(sol.u, exact_halfplane(p, grid0()));
    CAPTURE(gamma);
    CHECK(err <= 1e-3);
  }
}

TEST_CASE("gamma = 0 path equals the Neumann formula term by term") {
  const GaussianParams p;
  ProblemSpec spec;
  spec.gamma = 0.0;
  RunConfig c;
  c.data.f = "gaussian_bump";
  const DataTriple d = make_data(c, grid0());
  SolverOptions o;
  o.keep_terms = true;
  const SolutionRecord a = solve_forced_ibvp(spec, grid0(), d, o);
  const SolutionRecord b = solve_neumann(spec, grid0(), d, o);
  REQUIRE(a.terms);
  REQUIRE(b.terms);
  const double scale = a.u.max_abs();
  for (std::size_t k = 0; k < 5; ++k) CHECK((a.terms->term[k] - b.terms->term[k]).max_abs() <= 1e-12 * scale);
  CHECK((a.u - b.u).max_abs() <= 1e-12 * scale);
}

TEST_CASE("pure problem with zero datum gives zero") {
  const GridField g0 = zeros({grid0().x1_axis(), Axis{AxisTag::t, 65, 0.0, 2.0 / 64.0}});
  CHECK(solve_pure_ibvp(-1.0, g0, grid0()).u.max_abs() == 0.0);
}

TEST_CASE("pure problem rejects data outside 0 < t < 2") {
  const GridField g = sample([](double x1, double, double) { return cd(std::exp(-x1 * x1)); }, grid0(),
                             {AxisTag::x1, AxisTag::t});
  CHECK_THROWS_AS(solve_pure_ibvp(-1.0, g, grid0()), Error);
}

TEST_CASE("finite-time and full transforms agree for compactly supported data") {
  const Grid gt = Grid::make(20.0, 64, 20.0, 65, 2.0, 129);
  const GridField g = sample(
      [](double x1, double, double t) { return std::exp(cd(-x1 * x1, 0.5 * x1 + 2.0 * t)) * time_bump(t - 0.1, 1.8); },
      gt, {AxisTag::x1, AxisTag::t});
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double k1 = 4.0 * (U(rng) - 0.5);
    // k2 on the imaginary or the real half-axis.
    const cd k2 = i % 2 ? cd(0.0, 2.0 * U(rng)) : cd(3.0 * U(rng), 0.0);
    const cd a = time_transform(g, k1, k1 * k1 + k2 * k2, 2.0);
    const cd b = pure_boundary_transform(g, k1, k2);
    CHECK(std::abs(a - b) <= 1e-8 * std::max(1.0, std::abs(b)));
  }
}

// The two formulas discretize the time integral differently; the gap closes with Nt.
TEST_CASE("pure and forced solvers agree on boundary-only data") {
  for (double gamma : {-1.0, 0.5}) {
    ProblemSpec spec;
    spec.gamma = gamma;
    std::vector<double> gap;
    for (std::size_t nt : {33, 65}) {
      const Grid gr = Grid::make(20.0, 64, 20.0, 65, 0.5, nt);
      DataTriple d = zero_data(gr, false);
      d.g = bump_datum(gr);
      const GridField a = solve_forced_ibvp(spec, gr, d).u;
      gap.push_back((a - solve_pure_ibvp(gamma, d.g, gr).u).max_abs() / a.max_abs());
    }
    CAPTURE(gamma);
    CHECK(gap[1] <= 1e-5);
    CHECK(gap[0] >= 10.0 * gap[1]);
  }
}

TEST_CASE("free evolution is an isometry in H^s") {
  const Grid& grid = grid0();
  const GaussianParams p;
  GridField U0({grid.x1_axis(), grid.x2_whole_axis()});
  for (std::size_t i = 0; i < grid.N1; ++i)
    for (std::size_t j = 0; j < grid.M2(); ++j) U0(i, j) = gaussian_value(p, grid.x1(i), grid.x2_whole_axis().node(j), 0.0);
  const GridField U = solve_ivp(U0, nullptr, grid);
  for (double s : {0.0, 1.0, 1.25}) {
    const double n0 = sobolev_norm_plane(U0, s);
    for (std::size_t k = 0; k < grid.Nt; ++k)
      CHECK(std::abs(sobolev_norm_plane(slice_last(U, k), s) - n0) <= 1e-10 * n0);
  }
  SUBCASE("Gaussian data follow the closed form") {
    const GridField exact = gaussian_free_evolution(p, grid, grid.x2_whole_axis());
    CHECK((U - exact).max_abs() <= 1e-8);
  }
  SUBCASE("zero forcing through the Duhamel path changes nothing") {
    const GridField F = zeros({grid.x1_axis(), grid.x2_whole_axis(), grid.t_axis()});
    CHECK((solve_ivp(U0, &F, grid) - U).max_abs() <= 1e-12);
  }
}

TEST_CASE("Robin trace of a field constant in x2 with gamma = 0 vanishes") {
  const Grid grid = Grid::make(20.0, 16, 5.0, 33, 0.5, 5);
  const GridField u = sample([](double x1, double, double t) { return std::exp(cd(-x1 * x1, t)); }, grid,
                             {AxisTag::x1, AxisTag::x2, AxisTag::t});
  CHECK(robin_trace(u, 0.0).max_abs() <= 1e-12);
}

TEST_CASE("Robin trace of exp(-x2) is (gamma - 1) times the boundary value") {
  const Grid grid = Grid::make(20.0, 16, 5.0, 257, 0.5, 5);
  const GridField u = sample([](double x1, double x2, double t) { return std::exp(cd(-x1 * x1 - x2, t)); }, grid,
                             {AxisTag::x1, AxisTag::x2, AxisTag::t});
  for (double gamma : {-1.0, 0.0, 0.5}) {
    const GridField tr = robin_trace(u, gamma);
    const GridField ref = (gamma - 1.0) * slice_middle(u, 0);
    // one-sided difference error at h2 = 5/256
    CHECK((tr - ref).max_abs() <= 1e-7);
  }
}

TEST_CASE("spectral and finite-difference traces agree on band-limited fields") {
  const Grid grid = Grid::make(20.0, 16, 10.0, 257, 0.5, 5);
  const double L = 2.0 * grid.L2;  // x2 period of the whole-line box
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N;
  std::vector<cd> a(6);
  for (auto& v : a) v = cd(N(rng), N(rng));
  auto f = [&](double x1, double x2, double t) {
    cd v = 0.0;
    for (int n = -2; n <= 2; ++n) v += a[std::size_t(n + 2)] * std::exp(cd(0.0, 2.0 * pi * n * x2 / L));
    return v * std::exp(cd(-x1 * x1, t));
  };
  GridField U({grid.x1_axis(), grid.x2_whole_axis(), grid.t_axis()});
  for (std::size_t i = 0; i < grid.N1; ++i)
    for (std::size_t j = 0; j < grid.M2(); ++j)
      for (std::size_t k = 0; k < grid.Nt; ++k) U(i, j, k) = f(grid.x1(i), grid.x2_whole_axis().node(j), grid.t(k));
  const GridField u = sample(f, grid, {AxisTag::x1, AxisTag::x2, AxisTag::t});
  const double gamma = -0.7;
  const GridField a1 = robin_trace_spectral(U, gamma), a2 = robin_trace(u, gamma);
  CHECK((a1 - a2).max_abs() <= 1e-6 * a1.max_abs());
}

TEST_CASE("global relation residual") {
  SUBCASE("zero data") {
    ProblemSpec spec;
    spec.gamma = -1.0;
    const DataTriple d = zero_data(grid0(), false);
    const SolutionRecord sol = solve_forced_ibvp(spec, grid0(), d);
    CHECK(global_relation_residual(sol, spec, grid0(), d, random_relation_samples(20, 1)).residual == 0.0);
  }
  SUBCASE("manufactured run, base and refined") {
    ProblemSpec spec;
    spec.gamma = 0.5;
    SolverOptions o;
    const ManufacturedLevel a = manufactured_level(spec, grid0(), GaussianParams{}, 100, 7, o);
    o.nodes_per_unit *= 2;
    const ManufacturedLevel b = manufactured_level(spec, grid0().refined(), GaussianParams{}, 100, 7, o);
    CHECK(a.relation <= 1e-3);
    CHECK(a.relation >= 4.0 * b.relation);
  }
}

TEST_CASE("relation samples sit in the closed lower half-plane") {
  for (const auto& [k1, k2] : random_relation_samples(100, 5)) {
    CHECK(std::isfinite(k1));
    CHECK(k2.imag() <= 0.0);
  }
}

TEST_CASE("superposition of the two boundary pieces") {
  ProblemSpec spec;
  spec.gamma = -1.0;
  SUBCASE("zero data") {
    CHECK(superposition_residual(spec, grid0(), zero_data(grid0(), true)).discrepancy == 0.0);
  }
  SUBCASE("no forcing") {
    CHECK(superposition_residual(spec, grid0(), gaussian_data(GaussianParams{}, grid0(), -1.0)).relative <= 1e-3);
  }
  SUBCASE("full data") {
    RunConfig c;
    c.data.f = "gaussian_bump";
    CHECK(superposition_residual(spec, grid0(), make_data(c, grid0())).relative <= 1e-2);
  }
}
