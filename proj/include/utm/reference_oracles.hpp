#pragma once

#include "utm/core_model.hpp"
#include "utm/linear_solver.hpp"

namespace utm {

enum class OracleScheme { gaussian_closed_form, crank_nicolson, split_step };

struct OracleConfig {
  OracleScheme scheme = OracleScheme::crank_nicolson;
  // The oracle steps on a grid with every interval divided by this factor; results are
  // sampled back onto the caller's grid. Data must be given on oracle_grid().
  int refinement = 1;
  double theta_weight = 0.5;
};

Grid oracle_grid(const Grid& grid, const OracleConfig& cfg);

// amplitude * exp(-|x - c|^2 / width) * exp(i v.x) at t = 0, evolved freely.
struct GaussianParams {
  double amplitude = 1.0;
  double width = 2.0;
  double c1 = 0.0, c2 = 5.0;
  double v1 = 0.5, v2 = -2.0;
};

cd gaussian_value(const GaussianParams& p, double x1, double x2, double t);
cd gaussian_dx2(const GaussianParams& p, double x1, double x2, double t);

// (x1, x2, t) with the given x2 axis (half-plane or whole-line).
GridField gaussian_free_evolution(const GaussianParams& p, const Grid& grid, const Axis& x2);
// u_x2 + gamma u at x2 = 0, on (x1, t).
GridField gaussian_robin_trace(const GaussianParams& p, const Grid& grid, double gamma);
// u0 on (x1, x2) and the matching Robin datum: a compatible half-plane data set.
DataTriple gaussian_data(const GaussianParams& p, const Grid& grid, double gamma);

// Theta-scheme in t, 5-point Laplacian, ghost-node Robin condition at x2 = 0, zero Dirichlet at L2,
// periodic in x1 (diagonalized by the DFT), one tridiagonal solve per x1 mode and step.
SolutionRecord crank_nicolson_halfplane(const ProblemSpec& spec, const Grid& grid, const DataTriple& data,
                                        const OracleConfig& cfg = {});

// Strang splitting: half-step phase rotation for the nonlinearity, full linear step as above,
// half-step rotation. spec.nonlinear = false switches the rotation off.
SolutionRecord splitstep_nls(const ProblemSpec& spec, const Grid& grid, const DataTriple& data,
                             const OracleConfig& cfg = {});

}  // namespace utm
