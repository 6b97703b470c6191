#include <cmath>
#include <random>

#include "doctest.h"
#include "utm/nonlinear_solver.hpp"
#include "utm/reference_oracles.hpp"

using namespace utm;

namespace {

const Grid& small_grid() {
  static const Grid g = Grid::make(20.0, 32, 16.0, 33, 0.5, 17);
  return g;
}

DataFactory gaussian_factory(double amp, double dv1 = 0.0) {
  return [=](const Grid& g) {
    GaussianParams p;
    p.amplitude = amp;
    p.v1 += dv1;
    return gaussian_data(p, g, -1.0);
  };
}

ProblemSpec cubic(Sign sg = Sign::defocusing) {
  ProblemSpec spec;
  spec.gamma = -1.0;
  spec.alpha = 3;
  spec.sign = sg;
  spec.s = 1.2;
  return spec;
}

}  // namespace

TEST_CASE("nonlinearity of zero is zero") {
  const Grid& g = small_grid();
  CHECK(nonlinearity(zeros({g.x1_axis(), g.x2_axis(), g.t_axis()}), 3, Sign::defocusing).max_abs() == 0.0);
}

TEST_CASE("cubic term at u = 2i") {
  GridField u({Axis{AxisTag::x1, 1, 0.0, 1.0}});
  u.values[0] = cd(0.0, 2.0);
  CHECK(nonlinearity(u, 3, Sign::defocusing).values[0] == cd(0.0, 8.0));
  CHECK(nonlinearity(u, 3, Sign::focusing).values[0] == cd(0.0, -8.0));
  CHECK(nonlinearity(u, 5, Sign::defocusing).values[0] == cd(0.0, 32.0));
}

TEST_CASE("nonlinearity is gauge covariant") {
  const Grid& g = small_grid();
  std::mt19937_64 rng(8);
  std::normal_distribution<double> N;
  GridField u({g.x1_axis(), g.x2_axis()});
  for (auto& v : u.values) v = cd(N(rng), N(rng));
  const cd phase = std::exp(cd(0.0, 0.9));
  for (int alpha : {3, 5, 7}) {
    const GridField a = nonlinearity(phase * u, alpha, Sign::focusing);
    const GridField b = phase * nonlinearity(u, alpha, Sign::focusing);
    CHECK((a - b).max_abs() <= 1e-13 * b.max_abs());
  }
}

TEST_CASE("lifespan") {
  ProblemSpec spec = cubic();
  spec.T = 1.0;
  CHECK(lifespan(0.0, 0.0, spec) == 1.0);
  CHECK(lifespan(1.5, 0.5, spec) == doctest::Approx(0.0625));
  CHECK(lifespan(3.0, 1.0, spec) == doctest::Approx(0.0625 / 16.0));
  spec.alpha = 5;
  CHECK(lifespan(1.0, 1.0, spec) == doctest::Approx(std::pow(2.0, -8.0)));
}

TEST_CASE("Picard on zero data converges at once to zero") {
  const Grid& g = small_grid();
  PicardOptions po;
  po.oracle_refinement = 0;
  const PicardResult r = solve_nls_picard(cubic(), g, [](const Grid& gr) { return zero_data(gr, false); }, po);
  CHECK(r.history.converged);
  CHECK(r.history.iterations == 1);
  CHECK(r.record.u.max_abs() == 0.0);
  CHECK(r.history.T_star == g.T);
}

TEST_CASE("Picard on a small Gaussian contracts fast") {
  const PicardResult r = solve_nls_picard(cubic(Sign::focusing), small_grid(), gaussian_factory(0.0025));
  REQUIRE(r.history.converged);
  CHECK(r.history.u0_norm < 2e-2);
  const auto& q = r.history.contraction_ratios;
  REQUIRE(!q.empty());
  for (double v : q) CHECK(v < 0.5);
  for (std::size_t i = 1; i < r.history.differences.size(); ++i)
    CHECK(r.history.differences[i] < r.history.differences[i - 1]);
  CHECK(r.history.fixed_point_defect <= 2e-10);
  CHECK(r.record.diagnostics["oracle_rel_l2"].get<double>() <= 1e-2);
}

TEST_CASE("Lipschitz probe") {
  // the trace of a moving packet spreads in x1; the distance norms check edge decay
  const Grid g = Grid::make(28.0, 64, 16.0, 33, 0.5, 17);
  SUBCASE("identical data give 0") {
    const LipschitzReport r = lipschitz_probe(cubic(), g, gaussian_factory(0.05), gaussian_factory(0.05));
    CHECK(r.data_distance == 0.0);
    CHECK(r.ratio == 0.0);
  }
  SUBCASE("ratio is stable as the perturbation shrinks") {
    const LipschitzReport a = lipschitz_probe(cubic(), g, gaussian_factory(0.05), gaussian_factory(0.05, 1e-3));
    const LipschitzReport b = lipschitz_probe(cubic(), g, gaussian_factory(0.05), gaussian_factory(0.05, 1e-4));
    REQUIRE(a.ratio > 0.0);
    CHECK(b.ratio / a.ratio == doctest::Approx(1.0).epsilon(1.0));
    CHECK(b.data_distance < 0.2 * a.data_distance);
  }
}
