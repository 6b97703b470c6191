#include "utm/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace utm {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw Error(ErrorCode::Config, "line " + std::to_string(line) + ": " + msg);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

// Strips a trailing comment that is not inside a string.
std::string strip_comment(const std::string& s) {
  bool in = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in = !in;
    if (s[i] == '#' && !in) return s.substr(0, i);
  }
  return s;
}

ConfigValue parse_value(const std::string& v, int line) {
  if (v.empty()) fail(line, "missing value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') fail(line, "unterminated string");
    const std::string body = v.substr(1, v.size() - 2);
    if (body.find('"') != std::string::npos) fail(line, "embedded quote");
    return body;
  }
  if (v == "true") return true;
  if (v == "false") return false;
  std::string num;
  for (char c : v)
    if (c != '_') num += c;
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(num, &used);
  } catch (const std::exception&) {
    fail(line, "cannot parse value '" + v + "'");
  }
  if (used != num.size()) fail(line, "cannot parse value '" + v + "'");
  return d;
}

}  // namespace

ConfigTable parse_config_text(const std::string& text) {
  ConfigTable t;
  t[""];
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "bad section header");
      section = trim(s.substr(1, s.size() - 2));
      if (!valid_key(section)) fail(line, "bad section name");
      if (t.count(section)) fail(line, "duplicate section [" + section + "]");
      t[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    if (!valid_key(key)) fail(line, "bad key '" + key + "'");
    auto& sec = t[section];
    if (sec.count(key)) fail(line, "duplicate key '" + key + "'");
    sec[key] = parse_value(trim(s.substr(eq + 1)), line);
  }
  return t;
}

ConfigTable parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::linear_manufactured: return "linear_manufactured";
    case Scenario::pure_ibvp: return "pure_ibvp";
    case Scenario::nls_picard: return "nls_picard";
    case Scenario::estimate_ensemble: return "estimate_ensemble";
    case Scenario::global_relation_audit: return "global_relation_audit";
    case Scenario::superposition_audit: return "superposition_audit";
    case Scenario::oracle_crosscheck: return "oracle_crosscheck";
  }
  return "?";
}

Grid RunConfig::grid() const { return Grid::make(L1, N1, L2, N2, spec.T, Nt); }

nlohmann::json RunConfig::to_json() const {
  return {{"scenario", scenario_name(scenario)},
          {"seed", seed},
          {"output", output},
          {"spec",
           {{"gamma", spec.gamma},
            {"alpha", spec.alpha},
            {"sign", spec.sign == Sign::defocusing ? "defocusing" : "focusing"},
            {"s", spec.s},
            {"T", spec.T},
            {"lifespan_constant", spec.lifespan_constant},
            {"edge_floor", spec.edge_floor}}},
          {"grid", {{"L1", L1}, {"L2", L2}, {"N1", N1}, {"N2", N2}, {"Nt", Nt}}},
          {"data",
           {{"u0", data.u0},
            {"g", data.g},
            {"f", data.f},
            {"amplitude", data.gauss.amplitude},
            {"width", data.gauss.width},
            {"c1", data.gauss.c1},
            {"c2", data.gauss.c2},
            {"v1", data.gauss.v1},
            {"v2", data.gauss.v2},
            {"forcing_amplitude", data.forcing_amplitude},
            {"forcing_frequency", data.forcing_frequency},
            {"bump_amplitude", data.bump_amplitude}}},
          {"solver",
           {{"K_max", solver.K_max},
            {"nodes_per_unit", solver.nodes_per_unit},
            {"arc_nodes", solver.arc_nodes},
            {"variant", solver.variant == BoundaryVariant::horizon ? "horizon" : "causal"},
            {"extension", extension_name(extension)}}},
          {"audit",
           {{"tolerance", tolerance}, {"levels", levels}, {"min_gain", min_gain}, {"samples", samples}}},
          {"picard", {{"tol", picard_tol}, {"max_iter", picard_max_iter}, {"oracle_refinement", oracle_refinement}}},
          {"ensemble", {{"size", ensemble_size}}}};
}

namespace {

class Reader {
 public:
  explicit Reader(const ConfigTable& t) : t_(t) {}

  template <class F>
  void section(const std::string& name, const std::set<std::string>& keys, F&& body) {
    seen_.insert(name);
    auto it = t_.find(name);
    if (it == t_.end()) return;
    for (const auto& [k, v] : it->second)
      if (!keys.count(k)) throw Error(ErrorCode::Config, "unknown key '" + k + "' in " + where(name));
    cur_ = &it->second;
    cur_name_ = name;
    body();
    cur_ = nullptr;
  }

  void finish() const {
    for (const auto& [name, sec] : t_)
      if (!seen_.count(name)) throw Error(ErrorCode::Config, "unknown section [" + name + "]");
  }

  void num(const std::string& k, double& out) {
    if (auto v = get(k)) {
      if (!std::holds_alternative<double>(*v)) bad(k, "a number");
      out = std::get<double>(*v);
    }
  }
  void count(const std::string& k, std::size_t& out, std::size_t lo) {
    double d = double(out);
    num(k, d);
    if (d != std::floor(d) || d < double(lo) || d > 1e9) bad(k, "an integer >= " + std::to_string(lo));
    out = std::size_t(d);
  }
  void integer(const std::string& k, int& out, int lo) {
    double d = double(out);
    num(k, d);
    if (d != std::floor(d) || d < double(lo) || d > 1e9) bad(k, "an integer >= " + std::to_string(lo));
    out = int(d);
  }
  void str(const std::string& k, std::string& out, const std::set<std::string>& allowed = {}) {
    if (auto v = get(k)) {
      if (!std::holds_alternative<std::string>(*v)) bad(k, "a string");
      out = std::get<std::string>(*v);
      if (!allowed.empty() && !allowed.count(out)) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        throw Error(ErrorCode::Config, "unknown value '" + out + "' for " + k + " in " + where(cur_name_) +
                                           " (expected one of: " + list + ")");
      }
    }
  }

 private:
  const ConfigValue* get(const std::string& k) const {
    auto it = cur_->find(k);
    return it == cur_->end() ? nullptr : &it->second;
  }
  static std::string where(const std::string& s) { return s.empty() ? "top level" : "[" + s + "]"; }
  [[noreturn]] void bad(const std::string& k, const std::string& what) const {
    throw Error(ErrorCode::Config, k + " in " + where(cur_name_) + " must be " + what);
  }

  const ConfigTable& t_;
  const std::map<std::string, ConfigValue>* cur_ = nullptr;
  std::string cur_name_;
  std::set<std::string> seen_;
};

Scenario scenario_from(const std::string& s) {
  for (Scenario v : {Scenario::linear_manufactured, Scenario::pure_ibvp, Scenario::nls_picard,
                     Scenario::estimate_ensemble, Scenario::global_relation_audit, Scenario::superposition_audit,
                     Scenario::oracle_crosscheck})
    if (s == scenario_name(v)) return v;
  throw Error(ErrorCode::Config, "unknown scenario '" + s + "'");
}

}  // namespace

RunConfig run_config_from_table(const ConfigTable& t) {
  RunConfig c;
  Reader r(t);
  std::string scenario;
  double seed = 1.0;
  r.section("", {"scenario", "seed", "output"}, [&] {
    r.str("scenario", scenario);
    r.num("seed", seed);
    r.str("output", c.output);
  });
  if (scenario.empty()) throw Error(ErrorCode::Config, "missing scenario");
  c.scenario = scenario_from(scenario);
  if (seed < 0.0 || seed != std::floor(seed) || seed > 9.0e15) throw Error(ErrorCode::Config, "seed must be a non-negative integer");
  c.seed = std::uint64_t(seed);
  if (c.output.empty()) throw Error(ErrorCode::Config, "output must not be empty");

  r.section("spec", {"gamma", "alpha", "sign", "s", "T", "lifespan_constant", "edge_floor"}, [&] {
    r.num("gamma", c.spec.gamma);
    r.integer("alpha", c.spec.alpha, 1);
    std::string sign = "defocusing";
    r.str("sign", sign, {"defocusing", "focusing"});
    c.spec.sign = sign == "defocusing" ? Sign::defocusing : Sign::focusing;
    r.num("s", c.spec.s);
    r.num("T", c.spec.T);
    r.num("lifespan_constant", c.spec.lifespan_constant);
    r.num("edge_floor", c.spec.edge_floor);
  });
  r.section("grid", {"L1", "L2", "N1", "N2", "Nt"}, [&] {
    r.num("L1", c.L1);
    r.num("L2", c.L2);
    r.count("N1", c.N1, 4);
    r.count("N2", c.N2, 5);
    r.count("Nt", c.Nt, 5);
  });
  r.section("data", {"u0", "g", "f", "amplitude", "width", "c1", "c2", "v1", "v2", "forcing_amplitude",
                     "forcing_frequency", "bump_amplitude"},
            [&] {
              r.str("u0", c.data.u0, {"zero", "gaussian"});
              r.str("g", c.data.g, {"zero", "matched", "bump"});
              r.str("f", c.data.f, {"none", "zero", "gaussian_bump"});
              r.num("amplitude", c.data.gauss.amplitude);
              r.num("width", c.data.gauss.width);
              r.num("c1", c.data.gauss.c1);
              r.num("c2", c.data.gauss.c2);
              r.num("v1", c.data.gauss.v1);
              r.num("v2", c.data.gauss.v2);
              r.num("forcing_amplitude", c.data.forcing_amplitude);
              r.num("forcing_frequency", c.data.forcing_frequency);
              r.num("bump_amplitude", c.data.bump_amplitude);
            });
  r.section("solver", {"K_max", "nodes_per_unit", "arc_nodes", "variant", "extension"}, [&] {
    r.num("K_max", c.solver.K_max);
    r.integer("nodes_per_unit", c.solver.nodes_per_unit, 1);
    r.integer("arc_nodes", c.solver.arc_nodes, 8);
    std::string v = "horizon";
    r.str("variant", v, {"horizon", "causal"});
    c.solver.variant = v == "horizon" ? BoundaryVariant::horizon : BoundaryVariant::causal;
    std::string e = "zero_extension";
    r.str("extension", e, {"zero_extension", "cutoff_extension"});
    c.extension = e == "zero_extension" ? ExtensionMode::zero_extension : ExtensionMode::cutoff_extension;
  });
  r.section("audit", {"tolerance", "levels", "min_gain", "samples"}, [&] {
    r.num("tolerance", c.tolerance);
    r.integer("levels", c.levels, 1);
    r.num("min_gain", c.min_gain);
    r.count("samples", c.samples, 1);
  });
  r.section("picard", {"tol", "max_iter", "oracle_refinement"}, [&] {
    r.num("tol", c.picard_tol);
    r.integer("max_iter", c.picard_max_iter, 1);
    r.integer("oracle_refinement", c.oracle_refinement, 0);
  });
  r.section("ensemble", {"size"}, [&] { r.count("size", c.ensemble_size, 1); });
  r.finish();

  if (!(c.spec.T > 0.0)) throw Error(ErrorCode::Config, "T must be positive");
  if (!(c.L1 > 0.0 && c.L2 > 0.0)) throw Error(ErrorCode::Config, "box lengths must be positive");
  if (!(c.data.gauss.width > 0.0)) throw Error(ErrorCode::Config, "width must be positive");
  if (c.levels > 3) throw Error(ErrorCode::Config, "at most 3 refinement levels");
  try {
    (void)c.grid();
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, e.what());
  }
  if (c.spec.alpha < 3 || (c.spec.alpha - 1) % 2 != 0)
    throw Error(ErrorCode::Config, "alpha: (alpha-1)/2 must be a positive integer");
  return c;
}

RunConfig load_run_config(const std::string& path) { return run_config_from_table(parse_config_file(path)); }

}  // namespace utm
