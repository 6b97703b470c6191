#include "utm/nonlinear_solver.hpp"

#include <cmath>
#include <limits>

#include "utm/reference_oracles.hpp"

namespace utm {

GridField nonlinearity(const GridField& u, int alpha, Sign sign) {
  if (alpha < 3 || (alpha - 1) % 2 != 0)
    throw Error(ErrorCode::AlphaParity, "(alpha-1)/2 must be a positive integer");
  const int m = (alpha - 1) / 2;
  const double sg = sign == Sign::defocusing ? 1.0 : -1.0;
  GridField out(u.axes);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const cd v = u.values[i];
    const double r = std::norm(v);
    double p = 1.0;
    for (int k = 0; k < m; ++k) p *= r;
    out.values[i] = sg * p * v;
  }
  return out;
}

double lifespan(double u0_norm, double g_norm, const ProblemSpec& spec) {
  const double n = u0_norm + g_norm;
  if (n <= 0.0) return spec.T;
  return std::min(spec.T, spec.lifespan_constant * std::pow(n, -2.0 * double(spec.alpha - 1)));
}

nlohmann::json IterationHistory::to_json() const {
  return {{"differences", differences},
          {"contraction_ratios", contraction_ratios},
          {"attempted_horizons", attempted_horizons},
          {"converged", converged},
          {"T_star", T_star},
          {"iterations", iterations},
          {"fixed_point_defect", fixed_point_defect},
          {"u0_norm", u0_norm},
          {"g_norm", g_norm},
          {"norm", "sup_t H^s, even reflection upper bound"}};
}

double sup_t_norm(const GridField& u, double s) {
  double m = 0.0;
  for (std::size_t k = 0; k < u.dim(2); ++k)
    m = std::max(m, sobolev_norm_halfplane(slice_last(u, k), s, HalfplaneExtension::even_reflection, 0.0));
  return m;
}

namespace {

struct DataNorms {
  double u0 = 0.0, g = 0.0;
};

DataNorms data_norms(const DataTriple& d, double s) {
  return {sobolev_norm_halfplane(d.u0, s, HalfplaneExtension::even_reflection, 0.0), bts_norm(d.g, s).value};
}

DataTriple with_forcing(const DataTriple& d, GridField f) {
  DataTriple out{d.u0, d.g, std::nullopt};
  if (d.f) f += *d.f;
  out.f = std::move(f);
  return out;
}

// One attempt on [0, T]; throws NoContraction.
SolutionRecord iterate(const ProblemSpec& spec, const Grid& grid, const DataTriple& data, const PicardOptions& opts,
                       IterationHistory& h) {
  SolverOptions so = opts.solver;
  so.variant_gap = false;
  so.keep_terms = false;
  SolutionRecord cur = solve_forced_ibvp(spec, grid, data, so);
  int above = 0;
  for (int n = 0; n < opts.max_iter; ++n) {
    SolutionRecord next = solve_forced_ibvp(spec, grid, with_forcing(data, nonlinearity(cur.u, spec.alpha, spec.sign)), so);
    const double d = sup_t_norm(next.u - cur.u, spec.s);
    h.iterations = n + 1;
    if (!h.differences.empty()) {
      const double prev = h.differences.back();
      h.contraction_ratios.push_back(prev > 0.0 ? d / prev : 0.0);
      above = h.contraction_ratios.back() > 1.0 ? above + 1 : 0;
    }
    h.differences.push_back(d);
    cur = std::move(next);
    if (!std::isfinite(d) || above >= 3)
      throw Error(ErrorCode::NoContraction, "Picard differences grew for 3 consecutive iterations");
    if (d < opts.tol) {
      h.converged = true;
      break;
    }
  }
  const SolutionRecord check =
      solve_forced_ibvp(spec, grid, with_forcing(data, nonlinearity(cur.u, spec.alpha, spec.sign)), so);
  h.fixed_point_defect = sup_t_norm(check.u - cur.u, spec.s);
  return cur;
}

double rel_l2(const GridField& a, const GridField& b) {
  const double nb = b.l2();
  const double d = (a - b).l2();
  return nb > 0.0 ? d / nb : d;
}

}  // namespace

PicardResult solve_nls_picard(const ProblemSpec& spec_in, const Grid& grid_in, const DataFactory& factory,
                              const PicardOptions& opts) {
  ProblemSpec spec = spec_in;
  spec.nonlinear = true;
  spec.T = grid_in.T;
  const DataTriple d0 = factory(grid_in);
  validate_spec(spec, grid_in, d0);

  IterationHistory hist;
  const DataNorms dn = data_norms(d0, spec.s);
  hist.u0_norm = dn.u0;
  hist.g_norm = dn.g;
  double Tstar = opts.horizon > 0.0 ? std::min(opts.horizon, grid_in.T) : lifespan(dn.u0, dn.g, spec);

  for (int attempt = 0;; ++attempt) {
    hist.attempted_horizons.push_back(Tstar);
    hist.differences.clear();
    hist.contraction_ratios.clear();
    hist.converged = false;
    const Grid grid = Tstar == grid_in.T ? grid_in : grid_in.with_horizon(Tstar);
    ProblemSpec sp = spec;
    sp.T = Tstar;
    const DataTriple data = Tstar == grid_in.T ? d0 : factory(grid);
    try {
      PicardResult out;
      out.record = iterate(sp, grid, data, opts, hist);
      out.grid = grid;
      hist.T_star = Tstar;
      auto& dg = out.record.diagnostics;
      dg["picard"] = hist.to_json();
      dg["boundary_residual_max"] = (out.record.robin_trace - data.g).max_abs();
      if (opts.oracle_refinement > 0) {
        // Both schemes are symmetric second order, so one Richardson step removes the h^2 term.
        OracleConfig oc;
        oc.scheme = OracleScheme::split_step;
        oc.refinement = opts.oracle_refinement;
        GridField ref = splitstep_nls(sp, grid, factory(oracle_grid(grid, oc)), oc).u;
        if (oc.refinement % 2 == 0) {
          OracleConfig half = oc;
          half.refinement = oc.refinement / 2;
          ref *= cd(4.0 / 3.0);
          ref -= cd(1.0 / 3.0) * splitstep_nls(sp, grid, factory(oracle_grid(grid, half)), half).u;
          dg["oracle_extrapolation"] = "richardson";
        }
        dg["oracle_rel_l2"] = rel_l2(out.record.u, ref);
        dg["oracle_refinement"] = oc.refinement;
      }
      out.history = hist;
      return out;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoContraction || attempt >= opts.max_retries) throw;
      Tstar *= 0.5;
    }
  }
}

LipschitzReport lipschitz_probe(const ProblemSpec& spec_in, const Grid& grid, const DataFactory& a,
                                const DataFactory& b, const PicardOptions& opts) {
  ProblemSpec spec = spec_in;
  spec.T = grid.T;
  spec.nonlinear = true;
  const DataTriple da = a(grid), db = b(grid);
  const DataNorms na = data_norms(da, spec.s), nb = data_norms(db, spec.s);
  LipschitzReport r;
  r.T_star = std::min(lifespan(na.u0, na.g, spec), lifespan(nb.u0, nb.g, spec));
  if (opts.horizon > 0.0) r.T_star = std::min(r.T_star, opts.horizon);

  PicardOptions po = opts;
  po.horizon = r.T_star;
  po.max_retries = 0;
  po.oracle_refinement = 0;
  const PicardResult ra = solve_nls_picard(spec, grid, a, po);
  const PicardResult rb = solve_nls_picard(spec, grid, b, po);
  if (!ra.history.converged || !rb.history.converged)
    throw Error(ErrorCode::NonConvergent, "Lipschitz probe needs both runs converged");

  const Grid& g = ra.grid;
  const DataTriple ga = a(g), gb = b(g);
  r.data_distance = sobolev_norm_halfplane(ga.u0 - gb.u0, spec.s, HalfplaneExtension::even_reflection, 0.0) +
                    bts_norm(ga.g - gb.g, spec.s).value;
  r.solution_distance = sup_t_norm(ra.record.u - rb.record.u, spec.s);
  r.ratio = r.data_distance > 0.0 ? r.solution_distance / r.data_distance : 0.0;
  return r;
}

}  // namespace utm
