#include <cmath>

#include "doctest.h"
#include "utm/linear_solver.hpp"
#include "utm/reference_oracles.hpp"
#include "utm/scenarios.hpp"

using namespace utm;

namespace {

const Grid& coarse() {
  static const Grid g = Grid::make(20.0, 32, 16.0, 33, 0.5, 17);
  return g;
}

double rel_l2(const GridField& a, const GridField& b) { return (a - b).l2() / b.l2(); }

double cn_error(const Grid& grid, const GaussianParams& p, int refinement) {
  ProblemSpec spec;
  spec.gamma = -1.0;
  spec.T = grid.T;
  OracleConfig oc;
  oc.refinement = refinement;
  const SolutionRecord r = crank_nicolson_halfplane(spec, grid, gaussian_data(p, oracle_grid(grid, oc), -1.0), oc);
  return rel_l2(r.u, gaussian_free_evolution(p, grid, grid.x2_axis()));
}

}  // namespace

TEST_CASE("Gaussian closed form at t = 0 is the initial profile") {
  const GaussianParams p;
  const Grid& g = coarse();
  const GridField u = gaussian_free_evolution(p, g, g.x2_axis());
  double d = 0.0;
  for (std::size_t i = 0; i < g.N1; ++i)
    for (std::size_t j = 0; j < g.N2; ++j) {
      const double x1 = g.x1(i), x2 = g.x2(j);
      const cd ref = std::exp(-((x1 - p.c1) * (x1 - p.c1) + (x2 - p.c2) * (x2 - p.c2)) / p.width) *
                     std::exp(cd(0.0, p.v1 * x1 + p.v2 * x2));
      d = std::max(d, std::abs(u(i, j, 0) - ref));
    }
  CHECK(d <= 1e-15);
}

TEST_CASE("Gaussian closed form conserves mass on the whole line") {
  const Grid g = Grid::make(24.0, 64, 24.0, 97, 0.5, 17);
  const GridField u = gaussian_free_evolution(GaussianParams{}, g, g.x2_whole_axis());
  const double m0 = slice_last(u, 0).l2();
  for (std::size_t k = 1; k < g.Nt; ++k) CHECK(std::abs(slice_last(u, k).l2() - m0) <= 1e-12 * m0);
}

TEST_CASE("Gaussian closed form agrees with the whole-plane solver") {
  const Grid g = Grid::make(20.0, 64, 20.0, 65, 0.5, 17);
  const GaussianParams p;
  const GridField exact = gaussian_free_evolution(p, g, g.x2_whole_axis());
  const GridField U = solve_ivp(slice_last(exact, 0), nullptr, g);
  CHECK((U - exact).max_abs() <= 1e-8);
}

TEST_CASE("Crank-Nicolson with zero data gives zero") {
  ProblemSpec spec;
  spec.gamma = 0.5;
  spec.T = coarse().T;
  CHECK(crank_nicolson_halfplane(spec, coarse(), zero_data(coarse(), true)).u.max_abs() == 0.0);
}

TEST_CASE("Crank-Nicolson converges at second order") {
  const GaussianParams p;
  const double e2 = cn_error(coarse(), p, 2), e4 = cn_error(coarse(), p, 4);
  CAPTURE(e2);
  CAPTURE(e4);
  CHECK(e2 / e4 >= 3.0);
  CHECK(e2 / e4 <= 5.0);
}

TEST_CASE("forced solver and Crank-Nicolson agree within the cross-check threshold") {
  ProblemSpec spec;
  spec.gamma = -1.0;
  const CrossCheck x = oracle_crosscheck(spec, coarse(), GaussianParams{}, 4);
  CHECK(x.threshold >= 1e-2);
  CHECK(x.utm_vs_oracle <= x.threshold);
  CHECK(x.utm_vs_exact < x.oracle_vs_exact);
}

TEST_CASE("split-step without the nonlinearity is Crank-Nicolson") {
  ProblemSpec spec;
  spec.gamma = -1.0;
  spec.T = coarse().T;
  spec.nonlinear = false;
  const DataTriple d = gaussian_data(GaussianParams{}, coarse(), -1.0);
  const GridField a = splitstep_nls(spec, coarse(), d).u, b = crank_nicolson_halfplane(spec, coarse(), d).u;
  CHECK((a - b).max_abs() == 0.0);
}

TEST_CASE("split-step departs from the linear oracle at cubic order") {
  ProblemSpec spec;
  spec.gamma = -1.0;
  spec.T = coarse().T;
  spec.alpha = 3;
  std::vector<double> gap;
  for (double amp : {0.1, 0.05}) {
    GaussianParams p;
    p.amplitude = amp;
    const DataTriple d = gaussian_data(p, coarse(), -1.0);
    spec.nonlinear = false;
    const GridField lin = splitstep_nls(spec, coarse(), d).u;
    spec.nonlinear = true;
    gap.push_back((splitstep_nls(spec, coarse(), d).u - lin).l2());
  }
  CHECK(gap[0] / gap[1] == doctest::Approx(8.0).epsilon(0.05));
}
