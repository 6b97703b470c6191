#include "utm/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <sstream>

#include "utm/cli_runner.hpp"
#include "utm/nonlinear_solver.hpp"
#include "utm/parallel.hpp"
#include "utm/scenarios.hpp"

namespace fs = std::filesystem;

namespace utm {

namespace {

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(2) << v;
  return os.str();
}

std::string fix(double v, int p = 2) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(p) << v;
  return os.str();
}

const Grid& base_grid() {
  static const Grid g = Grid::make(20.0, 64, 20.0, 65, 0.5, 33);
  return g;
}

// Manufactured runs at the base grid and one refinement, shared by criteria 2 and 3.
struct ManufacturedCache {
  std::vector<double> gammas{-1.0, 0.0, 0.5};
  std::vector<std::array<ManufacturedLevel, 2>> levels;
  bool ready = false;
};

void fill(ManufacturedCache& mc, std::uint64_t seed) {
  if (mc.ready) return;
  for (double g : mc.gammas) {
    ProblemSpec spec;
    spec.gamma = g;
    std::array<ManufacturedLevel, 2> lv;
    SolverOptions o;
    lv[0] = manufactured_level(spec, base_grid(), GaussianParams{}, 100, seed, o);
    o.nodes_per_unit *= 2;
    lv[1] = manufactured_level(spec, base_grid().refined(), GaussianParams{}, 100, seed, o);
    mc.levels.push_back(lv);
  }
  mc.ready = true;
}

nlohmann::json level_json(const ManufacturedLevel& m) {
  return {{"N1", m.N1},
          {"N2", m.N2},
          {"Nt", m.Nt},
          {"contour_nodes", m.contour_nodes},
          {"error", m.error},
          {"relation", m.relation},
          {"reflected_relation", m.reflected_relation},
          {"boundary_residual", m.boundary_residual}};
}

CriterionResult c1_zero() {
  CriterionResult r{1, "zero-data exactness", false, "", {}, 0.0};
  const Grid& grid = base_grid();
  ProblemSpec spec;
  spec.gamma = -1.0;
  const double a = solve_forced_ibvp(spec, grid, zero_data(grid, true)).u.max_abs();
  const GridField g0 = zeros({grid.x1_axis(), Axis{AxisTag::t, 65, 0.0, 2.0 / 64.0}});
  const double b = solve_pure_ibvp(-1.0, g0, grid).u.max_abs();
  PicardOptions po;
  po.oracle_refinement = 0;
  const PicardResult pr = solve_nls_picard(spec, grid, [](const Grid& g) { return zero_data(g, false); }, po);
  const double c = pr.record.u.max_abs();
  r.data = {{"forced_ibvp", a}, {"pure_ibvp", b}, {"nls_picard", c}, {"picard_iterations", pr.history.iterations}};
  r.passed = a <= 1e-12 && b <= 1e-12 && c <= 1e-12;
  r.detail = "max|u| forced=" + sci(a) + " pure=" + sci(b) + " picard=" + sci(c) + " (limit 1e-12)";
  return r;
}

CriterionResult c2_manufactured(ManufacturedCache& mc, std::uint64_t seed) {
  CriterionResult r{2, "manufactured linear solution", true, "", nlohmann::json::array(), 0.0};
  fill(mc, seed);
  std::ostringstream d;
  for (std::size_t i = 0; i < mc.gammas.size(); ++i) {
    const auto& lv = mc.levels[i];
    const double gain = lv[0].error / lv[1].error;
    const bool ok = lv[0].error <= 1e-3 && gain >= 4.0;
    r.passed = r.passed && ok;
    r.data.push_back({{"gamma", mc.gammas[i]}, {"base", level_json(lv[0])}, {"refined", level_json(lv[1])}, {"gain", gain}});
    d << (i ? "; " : "") << "gamma=" << mc.gammas[i] << " err=" << sci(lv[0].error) << " gain=" << fix(gain, 1);
  }
  r.detail = d.str() + " (limits 1e-3, 4x)";
  return r;
}

CriterionResult c3_relation(ManufacturedCache& mc, std::uint64_t seed) {
  CriterionResult r{3, "global relation audit", true, "", nlohmann::json::array(), 0.0};
  fill(mc, seed);
  std::ostringstream d;
  for (std::size_t i = 0; i < mc.gammas.size(); ++i) {
    const auto& lv = mc.levels[i];
    const double gain = lv[0].relation / lv[1].relation;
    const bool ok = lv[0].relation <= 1e-3 && gain >= 4.0;
    r.passed = r.passed && ok;
    r.data.push_back({{"gamma", mc.gammas[i]},
                      {"residual", {lv[0].relation, lv[1].relation}},
                      {"reflected", {lv[0].reflected_relation, lv[1].reflected_relation}},
                      {"gain", gain}});
    d << (i ? "; " : "") << "gamma=" << mc.gammas[i] << " res=" << sci(lv[0].relation) << " gain=" << fix(gain, 1);
  }
  r.detail = d.str() + " (100 samples; limits 1e-3, 4x)";
  return r;
}

CriterionResult c4_superposition() {
  CriterionResult r{4, "superposition audit", false, "", {}, 0.0};
  RunConfig c;
  c.spec.gamma = -1.0;
  c.data.f = "gaussian_bump";
  std::vector<double> rel;
  Grid grid = base_grid();
  for (int l = 0; l < 2; ++l, grid = grid.refined()) {
    SolverOptions o;
    o.nodes_per_unit <<= l;
    rel.push_back(superposition_residual(c.spec, grid, make_data(c, grid), o).relative);
  }
  r.passed = rel[0] <= 1e-2 && rel[1] < rel[0];
  r.data = {{"relative_discrepancy", rel}};
  r.detail = "discrepancy=" + sci(rel[0]) + " refined=" + sci(rel[1]) + " (limit 1e-2, must shrink)";
  return r;
}

CriterionResult c5_isometry() {
  CriterionResult r{5, "isometry of the free evolution", true, "", {}, 0.0};
  const Grid& grid = base_grid();
  const GaussianParams p;
  GridField U0({grid.x1_axis(), grid.x2_whole_axis()});
  for (std::size_t i = 0; i < grid.N1; ++i)
    for (std::size_t j = 0; j < grid.M2(); ++j)
      U0(i, j) = gaussian_value(p, grid.x1(i), grid.x2_whole_axis().node(j), 0.0);
  const GridField U = solve_ivp(U0, nullptr, grid);
  std::ostringstream d;
  for (double s : {0.0, 1.0, 1.25}) {
    const double n0 = sobolev_norm_plane(U0, s);
    double dev = 0.0;
    for (std::size_t k = 0; k < grid.Nt; ++k) dev = std::max(dev, std::abs(sobolev_norm_plane(slice_last(U, k), s) - n0) / n0);
    r.data[fix(s, 2)] = dev;
    r.passed = r.passed && dev <= 1e-10;
    d << (s == 0.0 ? "" : " ") << "s=" << s << ":" << sci(dev);
  }
  r.detail = "max relative norm drift " + d.str() + " (limit 1e-10)";
  return r;
}

CriterionResult c6_laplace(std::uint64_t seed) {
  CriterionResult r{6, "Laplace transform bound", false, "", {}, 0.0};
  const LaplaceStudy st = laplace_study(100, seed);
  const double sp = std::sqrt(pi);
  r.passed = st.max_ratio <= sp + 1e-3 && st.witness_ratio >= 0.9 * sp;
  r.data = {{"trials", st.ratios.size()}, {"max_ratio", st.max_ratio}, {"witness_ratio", st.witness_ratio},
            {"sqrt_pi", sp}};
  r.detail = "max ratio=" + fix(st.max_ratio, 4) + " witness=" + fix(st.witness_ratio, 4) + " sqrt(pi)=" + fix(sp, 4) +
             " (witness >= 0.9 sqrt(pi))";
  return r;
}

CriterionResult c7_ensembles(std::uint64_t seed) {
  CriterionResult r{7, "estimate-boundedness ensembles", true, "", {}, 0.0};
  std::ostringstream d;
  const std::vector<double> bw{1.0, 2.0, 4.0, 8.0};
  const std::vector<std::pair<EstimateKind, double>> runs{
      {EstimateKind::linear_ibvp, 0.5}, {EstimateKind::pure_robin, -1.0}, {EstimateKind::pure_neumann, 0.0}};
  for (const auto& [k, gamma] : runs) {
    const EnsembleResult e = estimate_ensemble(k, 50, bw, seed, 1.2, gamma);
    nlohmann::json j = e.to_json();
    j["gamma"] = gamma;
    r.data[estimate_name(k)] = j;
    r.passed = r.passed && e.bounded;
    d << (d.tellp() > 0 ? "; " : "") << estimate_name(k) << " max=";
    for (std::size_t b = 0; b < e.max_ratio.size(); ++b) d << (b ? "/" : "") << fix(e.max_ratio[b], 3);
  }
  r.detail = d.str() + " (50 draws, bandwidth 1/2/4/8)";
  return r;
}

CriterionResult c8_kernel() {
  CriterionResult r{8, "kernel bound", false, "", {}, 0.0};
  const KernelStudy st = kernel_study();
  bool finite = true;
  for (const auto& row : st.rows) finite = finite && std::isfinite(row[4]) && row[4] > 0.0;
  r.passed = finite && st.scale_defect <= 1e-3;
  r.data = {{"points", st.rows.size()}, {"max_ratio", st.max_ratio}, {"min_ratio", st.min_ratio},
            {"scale_defect", st.scale_defect}, {"rows", st.rows}};
  r.detail = "ratio in [" + fix(st.min_ratio, 3) + ", " + fix(st.max_ratio, 3) + "] over " +
             std::to_string(st.rows.size()) + " points, scale defect=" + sci(st.scale_defect) + " (limit 1e-3)";
  return r;
}

CriterionResult c9_nonlinear() {
  CriterionResult r{9, "nonlinear contraction", true, "", {}, 0.0};
  const Grid& grid = base_grid();
  std::ostringstream d;
  auto factory = [](double amp) {
    return [amp](const Grid& g) {
      GaussianParams p;
      p.amplitude = amp;
      return gaussian_data(p, g, -1.0);
    };
  };
  ProblemSpec spec;
  spec.gamma = -1.0;
  spec.alpha = 3;
  spec.s = 1.2;
  for (Sign sg : {Sign::defocusing, Sign::focusing}) {
    spec.sign = sg;
    const PicardResult pr = solve_nls_picard(spec, grid, factory(0.1));
    double maxratio = 0.0;
    for (double q : pr.history.contraction_ratios) maxratio = std::max(maxratio, q);
    const double oracle = pr.record.diagnostics["oracle_rel_l2"].get<double>();
    const bool ok = pr.history.converged && maxratio < 1.0 &&
                    pr.history.fixed_point_defect <= 2.0 * 1e-10 && oracle <= 1e-2;
    r.passed = r.passed && ok;
    const char* name = sg == Sign::defocusing ? "defocusing" : "focusing";
    r.data[name] = {{"history", pr.history.to_json()}, {"oracle_rel_l2", oracle}};
    d << name << ": ratio<=" << sci(maxratio) << " cert=" << sci(pr.history.fixed_point_defect)
      << " oracle=" << sci(oracle) << "; ";
  }
  // Cubic smallness of the sign difference under halving of the data.
  PicardOptions po;
  po.oracle_refinement = 0;
  po.horizon = grid.T;
  std::vector<double> diff;
  for (double amp : {0.1, 0.05}) {
    spec.sign = Sign::defocusing;
    const GridField up = solve_nls_picard(spec, grid, factory(amp), po).record.u;
    spec.sign = Sign::focusing;
    const GridField um = solve_nls_picard(spec, grid, factory(amp), po).record.u;
    diff.push_back(sup_t_norm(up - um, spec.s));
  }
  const double shrink = diff[0] / diff[1];
  r.passed = r.passed && shrink >= 6.0 && shrink <= 10.0;
  r.data["sign_difference"] = diff;
  r.data["shrink"] = shrink;
  d << "sign gap shrink=" << fix(shrink, 2) << " (8 expected)";
  r.detail = d.str();
  return r;
}

CriterionResult c10_neumann() {
  CriterionResult r{10, "Neumann consistency", false, "", {}, 0.0};
  const Grid& grid = base_grid();
  const GaussianParams p;
  const DataTriple data = gaussian_data(p, grid, 0.0);
  ProblemSpec spec;
  spec.gamma = 0.0;
  const GridField un = solve_neumann(spec, grid, data).u;
  const GridField ur = solve_forced_ibvp(spec, grid, data).u;
  const double m = un.max_abs();
  const double same = (un - ur).max_abs() / m;
  std::vector<double> d;
  for (double g : {-1e-1, -1e-2, -1e-3}) {
    spec.gamma = g;
    d.push_back((solve_forced_ibvp(spec, grid, data).u - un).max_abs() / m);
  }
  const bool mono = d[0] > d[1] && d[1] > d[2];
  r.passed = same <= 1e-12 && mono;
  r.data = {{"neumann_vs_robin_path", same}, {"gamma", {-1e-1, -1e-2, -1e-3}}, {"distance", d}};
  r.detail = "dedicated vs gamma=0 path " + sci(same) + "; distance at gamma=-1e-1/-1e-2/-1e-3: " + sci(d[0]) + "/" +
             sci(d[1]) + "/" + sci(d[2]);
  return r;
}

std::vector<std::pair<std::string, std::string>> hashes(const Manifest& m) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : m.files) out.emplace_back(f.path, f.sha256);
  return out;
}

// One pass over criteria 1-10; returns the manifest.
Manifest run_pass(const AcceptanceOptions& opt, const fs::path& root, std::vector<CriterionResult>& results,
                  std::ostream* progress) {
  fs::remove_all(root);
  fs::create_directories(root);
  ArtifactSink sink(root.string());
  ManufacturedCache mc;
  const std::vector<std::function<CriterionResult()>> crit{
      [] { return c1_zero(); },
      [&] { return c2_manufactured(mc, opt.seed); },
      [&] { return c3_relation(mc, opt.seed); },
      [] { return c4_superposition(); },
      [] { return c5_isometry(); },
      [&] { return c6_laplace(opt.seed); },
      [&] { return c7_ensembles(opt.seed); },
      [] { return c8_kernel(); },
      [] { return c9_nonlinear(); },
      [] { return c10_neumann(); }};
  bool all = true;
  nlohmann::json summary;
  for (std::size_t i = 0; i < crit.size(); ++i) {
    const int id = int(i) + 1;
    if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = crit[i]();
    } catch (const std::exception& e) {
      r.id = id;
      r.name = "criterion " + std::to_string(id);
      r.passed = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream name;
    name << "criterion_" << std::setw(2) << std::setfill('0') << id << ".json";
    sink.json(name.str(), {{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"data", r.data}});
    summary[std::to_string(id)] = r.passed;
    all = all && r.passed;
    if (progress) *progress << format_line(r) << std::endl;
    results.push_back(std::move(r));
  }
  return write_manifest(root.string(), "selftest", sha256_text(std::to_string(opt.seed)), all,
                        all ? exit_ok : exit_acceptance, summary);
}

}  // namespace

std::string format_line(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.passed ? "[PASS] " : "[FAIL] ") << "criterion " << std::setw(2) << r.id << " " << r.name << ": " << r.detail
     << " [" << fix(r.seconds, 1) << " s]";
  return os.str();
}

AcceptanceReport run_acceptance(const AcceptanceOptions& opt, std::ostream* progress) {
  AcceptanceReport rep;
  const fs::path root = opt.output;
  const Manifest first = run_pass(opt, root / "run", rep.results, progress);
  rep.manifest_path = (root / "run" / "manifest.json").string();

  const bool want11 = opt.determinism && (opt.only.empty() || std::count(opt.only.begin(), opt.only.end(), 11));
  if (want11) {
    const auto t0 = std::chrono::steady_clock::now();
    const int w = worker_count();
    const std::string other = std::to_string(w > 1 ? 1 : 2);
    const char* prev = std::getenv("UTM_WORKERS");
    const std::string saved = prev ? prev : "";
    setenv("UTM_WORKERS", other.c_str(), 1);
    std::vector<CriterionResult> again;
    Manifest second;
    std::string err;
    try {
      second = run_pass(opt, root / "rerun", again, nullptr);
    } catch (const std::exception& e) {
      err = e.what();
    }
    if (prev) setenv("UTM_WORKERS", saved.c_str(), 1);
    else unsetenv("UTM_WORKERS");
    CriterionResult r{11, "determinism", false, "", {}, 0.0};
    const auto h1 = hashes(first), h2 = hashes(second);
    std::size_t differing = 0;
    for (std::size_t i = 0; i < std::min(h1.size(), h2.size()); ++i) differing += h1[i] != h2[i];
    differing += std::max(h1.size(), h2.size()) - std::min(h1.size(), h2.size());
    r.passed = err.empty() && !h1.empty() && differing == 0;
    r.data = {{"workers", {w, std::stoi(other)}}, {"files", h1.size()}, {"differing", differing}};
    r.detail = err.empty() ? "two selftest passes (" + std::to_string(w) + " and " + other + " workers): " +
                                 std::to_string(h1.size()) + " files, " + std::to_string(differing) + " hash mismatches"
                           : "error: " + err;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (progress) *progress << format_line(r) << std::endl;
    rep.results.push_back(std::move(r));
  }
  rep.all_passed = true;
  for (const auto& r : rep.results) rep.all_passed = rep.all_passed && r.passed;
  return rep;
}

}  // namespace utm
