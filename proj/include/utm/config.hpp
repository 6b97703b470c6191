#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>

#include "json.hpp"
#include "utm/core_model.hpp"
#include "utm/function_spaces.hpp"
#include "utm/linear_solver.hpp"
#include "utm/reference_oracles.hpp"

namespace utm {

// Flat key/value file: `key = value` lines under optional `[section]` headers, `#` comments.
// Values are double-quoted strings, numbers, or true/false.
using ConfigValue = std::variant<std::string, double, bool>;
using ConfigTable = std::map<std::string, std::map<std::string, ConfigValue>>;  // "" is the top level

ConfigTable parse_config_text(const std::string& text);
ConfigTable parse_config_file(const std::string& path);

enum class Scenario {
  linear_manufactured,
  pure_ibvp,
  nls_picard,
  estimate_ensemble,
  global_relation_audit,
  superposition_audit,
  oracle_crosscheck
};
const char* scenario_name(Scenario s);

struct DataProfile {
  std::string u0 = "gaussian";  // zero | gaussian
  std::string g = "matched";    // zero | matched | bump
  std::string f = "none";       // none | zero | gaussian_bump
  GaussianParams gauss;
  double forcing_amplitude = 0.5;
  double forcing_frequency = 3.0;
  double bump_amplitude = 1.0;  // g = bump: amplitude * exp(-x1^2) * theta(t)
};

struct RunConfig {
  Scenario scenario = Scenario::linear_manufactured;
  ProblemSpec spec;
  double L1 = 20.0, L2 = 20.0;
  std::size_t N1 = 64, N2 = 65, Nt = 33;
  DataProfile data;
  std::string output = "utm_out";
  std::uint64_t seed = 1;
  SolverOptions solver;
  ExtensionMode extension = ExtensionMode::zero_extension;
  // Audits: pass threshold at the base level and number of refinement levels.
  double tolerance = 1e-3;
  int levels = 2;
  double min_gain = 4.0;
  std::size_t samples = 100;
  // Picard.
  double picard_tol = 1e-10;
  int picard_max_iter = 30;
  int oracle_refinement = 4;
  // Ensembles.
  std::size_t ensemble_size = 50;

  Grid grid() const;
  nlohmann::json to_json() const;
};

// Unknown sections, keys, profile names or out-of-range values throw Error(Config).
RunConfig run_config_from_table(const ConfigTable& t);
RunConfig load_run_config(const std::string& path);

}  // namespace utm
