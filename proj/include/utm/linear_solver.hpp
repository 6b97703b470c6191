#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "json.hpp"
#include "utm/contours.hpp"
#include "utm/core_model.hpp"

namespace utm {

enum class BoundaryVariant { horizon, causal };

struct SolverOptions {
  double K_max = 0.0;  // 0 selects max |k1| of the dual grid
  int nodes_per_unit = 16;
  int arc_nodes = 32;
  // Analytically null continuation of the time data past the upper limit; removes the
  // algebraic k2 tail that contour truncation would otherwise leave.
  bool tail_correction = true;
  int taylor_order = 3;
  double taper_length = 0.5;
  // horizon: g~ taken over [0, T]; causal: over [0, t].
  BoundaryVariant variant = BoundaryVariant::horizon;
  bool variant_gap = true;
  bool keep_terms = false;
};

// Initial-data term, reflected initial-data term, forcing term, reflected forcing term, boundary term.
struct TermBreakdown {
  std::array<GridField, 5> term;
};

struct SolutionRecord {
  GridField u;                // (x1, x2, t)
  GridField dirichlet_trace;  // (x1, t)
  GridField robin_trace;      // (x1, t)
  nlohmann::json diagnostics;
  std::optional<TermBreakdown> terms;
};

SolutionRecord solve_forced_ibvp(const ProblemSpec& spec, const Grid& grid, const DataTriple& data,
                                 const SolverOptions& opts = {});

// Neumann formula with coefficients 1 and 2 written out.
SolutionRecord solve_neumann(const ProblemSpec& spec, const Grid& grid, const DataTriple& data,
                             const SolverOptions& opts = {});

// Boundary term only, with g the full space-time transform of data supported in t in (0, 2).
// g may sit on any uniform t axis; the solution is evaluated on the grid's t nodes.
SolutionRecord solve_pure_ibvp(double gamma, const GridField& g, const Grid& grid, const SolverOptions& opts = {},
                               double support_floor = 1e-8);

// g^(k1, -k1^2 - k2^2): full transform of g (x1, t) over its own axis at complex k2.
cd pure_boundary_transform(const GridField& g, double k1, cd k2);

// Whole-plane problem on the periodic box x2 in [-L2, L2): axes (x1, x2, t).
GridField solve_ivp(const GridField& U0, const GridField* F, const Grid& grid);

GridField even_extension(const GridField& half, const Grid& grid);
GridField zero_extension(const GridField& half, const Grid& grid);
GridField restrict_halfplane(const GridField& whole, const Grid& grid);

// u_x2 + gamma u at x2 = 0, one-sided fourth-order differences on the half-plane grid.
GridField robin_trace(const GridField& u, double gamma);
// Same, with the x2 derivative taken spectrally on a whole-plane field.
GridField robin_trace_spectral(const GridField& U, double gamma);

struct GlobalRelationReport {
  double residual = 0.0;            // max over samples and t, normalized
  double reflected_residual = 0.0;  // relation at (k1, -k2) for Im k2 >= 0
  double scale = 0.0;
  std::size_t samples = 0;
};

// Samples are (k1, k2) with Im k2 <= 0.
GlobalRelationReport global_relation_residual(const SolutionRecord& sol, const ProblemSpec& spec, const Grid& grid,
                                              const DataTriple& data,
                                              const std::vector<std::pair<double, cd>>& samples);
std::vector<std::pair<double, cd>> random_relation_samples(std::size_t n, unsigned seed, double kmax = 2.5);

struct SuperpositionReport {
  double discrepancy = 0.0;  // max |lhs - rhs|
  double relative = 0.0;     // divided by max |lhs|
};

SuperpositionReport superposition_residual(const ProblemSpec& spec, const Grid& grid, const DataTriple& data,
                                           const SolverOptions& opts = {});

}  // namespace utm
