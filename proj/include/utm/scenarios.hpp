#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "utm/config.hpp"
#include "utm/nonlinear_solver.hpp"

namespace utm {

// Data profiles named in run configs.
DataTriple make_data(const RunConfig& c, const Grid& grid);
DataFactory data_factory(const RunConfig& c);

// Smooth bump on (0, T): exp(4 - 1/(r(1-r))) with r = t/T, 1 at the midpoint.
double time_bump(double t, double T);

// Writes below a root directory and remembers every file it wrote (relative paths, in order).
class ArtifactSink {
 public:
  explicit ArtifactSink(std::string root);

  void json(const std::string& rel, const nlohmann::json& j);
  void text(const std::string& rel, const std::string& s);
  void field(const std::string& rel, const GridField& f);  // rel.bin + rel.json
  void csv(const std::string& rel, const GridField& f);
  void table(const std::string& rel, const std::vector<std::string>& header,
             const std::vector<std::vector<double>>& rows);

  const std::string& root() const { return root_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::string path(const std::string& rel);
  std::string root_;
  std::vector<std::string> files_;
};

// Removes timing entries so that artifacts depend only on inputs.
nlohmann::json strip_timings(nlohmann::json j);

// ---- experiments shared by the scenarios and the acceptance suite ----

struct ManufacturedLevel {
  std::size_t N1 = 0, N2 = 0, Nt = 0, contour_nodes = 0;
  double error = 0.0;               // relative L2 against the closed form
  double relation = 0.0;            // global relation residual
  double reflected_relation = 0.0;  // at (k1, -k2)
  double boundary_residual = 0.0;
  double initial_residual = 0.0;
  double variant_gap = 0.0;
};

ManufacturedLevel manufactured_level(const ProblemSpec& spec, const Grid& grid, const GaussianParams& p,
                                     std::size_t samples, std::uint64_t seed, const SolverOptions& opts = {});

struct CrossCheck {
  double utm_vs_exact = 0.0;
  double oracle_vs_exact = 0.0;
  double utm_vs_oracle = 0.0;
  double threshold = 0.0;  // max(1e-2, 3 * oracle_vs_exact)
  double mass_balance_defect = 0.0;
};

CrossCheck oracle_crosscheck(const ProblemSpec& spec, const Grid& grid, const GaussianParams& p, int refinement);

// Estimate ensembles: the ratio of the solution side to the data side of a linear estimate.
enum class EstimateKind { linear_ibvp, pure_robin, pure_neumann };
const char* estimate_name(EstimateKind k);

struct EnsembleResult {
  EstimateKind kind = EstimateKind::linear_ibvp;
  std::vector<double> bandwidths;
  std::vector<std::vector<double>> ratios;  // [bandwidth][draw]
  std::vector<double> max_ratio;
  double excluded_mass = 0.0;  // homogeneous norms only
  bool bounded = false;        // finite, and no monotone growth beyond 1.5x across the doublings

  nlohmann::json to_json() const;
};

EnsembleResult estimate_ensemble(EstimateKind kind, std::size_t draws, const std::vector<double>& bandwidths,
                                 std::uint64_t seed, double s = 1.2, double gamma = -1.0);

struct LaplaceStudy {
  std::vector<double> ratios;
  double max_ratio = 0.0;
  double witness_ratio = 0.0;  // truncated k^{-1/2}
};

LaplaceStudy laplace_study(std::size_t trials, std::uint64_t seed);

struct KernelStudy {
  std::vector<std::vector<double>> rows;  // k1, k2, beta, I, ratio, error estimate
  double max_ratio = 0.0, min_ratio = 0.0;
  double scale_defect = 0.0;  // max relative change of the ratio under (k1, k2) -> lambda (k1, k2)
};

KernelStudy kernel_study();

// ---- scenario pipelines ----

struct ScenarioOutcome {
  bool passed = true;
  nlohmann::json summary;
};

// Runs the configured pipeline, writing its artifacts through the sink.
ScenarioOutcome run_pipeline(const RunConfig& c, ArtifactSink& out);

}  // namespace utm
