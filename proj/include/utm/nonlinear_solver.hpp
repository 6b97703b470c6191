#pragma once

#include <functional>
#include <vector>

#include "json.hpp"
#include "utm/core_model.hpp"
#include "utm/function_spaces.hpp"
#include "utm/linear_solver.hpp"

namespace utm {

// sign * |u|^{alpha-1} u, by integer powers of u conj(u).
GridField nonlinearity(const GridField& u, int alpha, Sign sign);

// min(T, c (u0_norm + g_norm)^{-2(alpha-1)}) with c = spec.lifespan_constant.
double lifespan(double u0_norm, double g_norm, const ProblemSpec& spec);

struct IterationHistory {
  std::vector<double> differences;         // sup_t ||u_{n+1} - u_n||, half-plane H^s bound
  std::vector<double> contraction_ratios;  // consecutive quotients of the above
  std::vector<double> attempted_horizons;  // T* of every attempt, last one used
  bool converged = false;
  double T_star = 0.0;
  int iterations = 0;
  double fixed_point_defect = 0.0;  // sup_t ||Phi(u) - u|| for the returned u
  double u0_norm = 0.0, g_norm = 0.0;

  nlohmann::json to_json() const;
};

// Data are resampled for every horizon the driver tries.
using DataFactory = std::function<DataTriple(const Grid&)>;

struct PicardOptions {
  double tol = 1e-10;
  int max_iter = 30;
  int max_retries = 4;
  SolverOptions solver;
  // Compare the final iterate with the split-step oracle at this refinement; 0 skips it.
  int oracle_refinement = 4;
  // Positive: run on [0, horizon] instead of computing the lifespan.
  double horizon = 0.0;
};

struct PicardResult {
  SolutionRecord record;
  IterationHistory history;
  Grid grid;  // the grid of the accepted attempt
};

// Sup over t nodes of the even-reflection half-plane H^s norm of a (x1, x2, t) field.
double sup_t_norm(const GridField& u, double s);

// Picard iteration u -> S[u0, g; N(u) + f] on [0, T*]. On NoContraction T* is halved and the
// run repeated, up to max_retries times.
PicardResult solve_nls_picard(const ProblemSpec& spec, const Grid& grid, const DataFactory& data,
                              const PicardOptions& opts = {});

struct LipschitzReport {
  double ratio = 0.0;
  double solution_distance = 0.0;
  double data_distance = 0.0;
  double T_star = 0.0;
};

// Both runs share the smaller of the two lifespans.
LipschitzReport lipschitz_probe(const ProblemSpec& spec, const Grid& grid, const DataFactory& a, const DataFactory& b,
                                const PicardOptions& opts = {});

}  // namespace utm
