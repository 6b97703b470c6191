#include "utm/cli_runner.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "utm/scenarios.hpp"

namespace fs = std::filesystem;

namespace utm {

namespace {

std::string hex(const unsigned char* d, unsigned n) {
  std::ostringstream os;
  for (unsigned i = 0; i < n; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(d[i]);
  return os.str();
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) { EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr); }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;
  void update(const void* p, std::size_t n) { EVP_DigestUpdate(ctx_, p, n); }
  std::string hexdigest() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned n = 0;
    EVP_DigestFinal_ex(ctx_, md, &n);
    return hex(md, n);
  }

 private:
  EVP_MD_CTX* ctx_;
};

int exit_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::Config:
    case ErrorCode::AlphaParity:
    case ErrorCode::EdgeDecay:
    case ErrorCode::RangeS:
    case ErrorCode::AxisMismatch:
    case ErrorCode::GridMismatch:
    case ErrorCode::HorizonTooLarge:
    case ErrorCode::TruncationTooSmall:
    case ErrorCode::SupportViolation:
    case ErrorCode::TooFewNodes:
    case ErrorCode::UpperHalfK2: return exit_config;
    default: return exit_solver;
  }
}

// Input checks that need the data but write nothing.
void prevalidate(const RunConfig& c) {
  const Grid grid = c.grid();
  switch (c.scenario) {
    case Scenario::estimate_ensemble:
    case Scenario::global_relation_audit:
    case Scenario::oracle_crosscheck: {
      ProblemSpec sp = c.spec;
      validate_spec(sp, grid, gaussian_data(c.data.gauss, grid, c.spec.gamma));
      return;
    }
    case Scenario::nls_picard: {
      ProblemSpec sp = c.spec;
      sp.nonlinear = true;
      validate_spec(sp, grid, make_data(c, grid));
      if (c.spec.T >= 1.0) throw Error(ErrorCode::HorizonTooLarge, "the nonlinear path needs T < 1");
      return;
    }
    case Scenario::pure_ibvp:
      if (c.spec.T >= 1.0) throw Error(ErrorCode::HorizonTooLarge, "the extension needs T < 1");
      [[fallthrough]];
    default: validate_spec(c.spec, grid, make_data(c, grid));
  }
}

}  // namespace

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingArtifact, "cannot read " + path);
  Sha256 h;
  char buf[1 << 15];
  while (in) {
    in.read(buf, sizeof buf);
    h.update(buf, std::size_t(in.gcount()));
  }
  return h.hexdigest();
}

std::string sha256_text(const std::string& text) {
  Sha256 h;
  h.update(text.data(), text.size());
  return h.hexdigest();
}

nlohmann::json Manifest::to_json() const {
  nlohmann::json f = nlohmann::json::array();
  for (const auto& e : files) f.push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
  return {{"scenario", scenario}, {"config_sha256", config_sha256}, {"exit_code", exit_code},
          {"passed", passed},     {"files", f},                     {"summary", summary}};
}

Manifest Manifest::from_json(const nlohmann::json& j) {
  Manifest m;
  m.scenario = j.value("scenario", "");
  m.config_sha256 = j.value("config_sha256", "");
  m.exit_code = j.value("exit_code", 0);
  m.passed = j.value("passed", true);
  m.summary = j.value("summary", nlohmann::json::object());
  if (j.contains("files"))
    for (const auto& e : j["files"])
      m.files.push_back({e.at("path").get<std::string>(), e.at("sha256").get<std::string>(),
                         e.value("bytes", std::uintmax_t(0))});
  return m;
}

Manifest write_manifest(const std::string& root, const std::string& scenario, const std::string& config_sha,
                        bool passed, int exit_code, const nlohmann::json& summary) {
  Manifest m;
  m.scenario = scenario;
  m.config_sha256 = config_sha;
  m.passed = passed;
  m.exit_code = exit_code;
  m.summary = summary;
  std::vector<std::string> rel;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) {
      const std::string r = fs::relative(e.path(), root).generic_string();
      if (r != "manifest.json") rel.push_back(r);
    }
  std::sort(rel.begin(), rel.end());
  for (const auto& r : rel) {
    const fs::path p = fs::path(root) / r;
    m.files.push_back({r, sha256_file(p.string()), fs::file_size(p)});
  }
  std::ofstream os(fs::path(root) / "manifest.json");
  os << m.to_json().dump(2) << "\n";
  return m;
}

std::string gnuplot_script(const std::vector<std::string>& csv_files) {
  std::ostringstream os;
  os << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set terminal pngcairo size 900,600\n";
  for (const auto& f : csv_files) {
    std::ifstream in(f);
    std::string header;
    std::getline(in, header);
    const std::string name = fs::path(f).filename().string();
    const std::string png = fs::path(f).stem().string() + ".png";
    os << "\nset output '" << png << "'\n";
    if (header.rfind("x1,x2,", 0) == 0 || header.rfind("x1,t,", 0) == 0) {
      os << "set view map\nsplot '" << name << "' using 1:2:5 with pm3d title 'abs'\nunset view\n";
    } else if (header.find(",re,im,abs") != std::string::npos) {
      os << "plot '" << name << "' using 1:4 with lines title 'abs'\n";
    } else {
      const auto cols = std::count(header.begin(), header.end(), ',') + 1;
      os << "set logscale y\nplot ";
      for (long c = 2; c <= cols; ++c) os << (c > 2 ? ", " : "") << "'" << name << "' using 1:" << c << " with linespoints";
      os << "\nunset logscale y\n";
    }
  }
  return os.str();
}

RunOutcome run_scenario(const RunConfig& config) {
  RunOutcome out;
  try {
    prevalidate(config);
  } catch (const Error& e) {
    out.exit_code = exit_for(e.code());
    out.message = e.what();
    return out;
  }
  const fs::path root = config.output;
  const fs::path stage = root / ".partial";
  const bool created = !fs::exists(root);
  fs::remove_all(stage);
  auto cleanup = [&] {
    std::error_code ec;
    fs::remove_all(stage, ec);
    if (created && fs::is_empty(root, ec)) fs::remove(root, ec);
  };
  const nlohmann::json cj = config.to_json();
  const std::string config_sha = sha256_text(cj.dump());
  ScenarioOutcome so;
  try {
    ArtifactSink sink(stage.string());
    sink.json("config.json", cj);
    so = run_pipeline(config, sink);
    std::vector<std::string> csvs;
    for (const auto& f : sink.files())
      if (fs::path(f).extension() == ".csv") csvs.push_back((stage / f).string());
    sink.text("plot.gp", gnuplot_script(csvs));
  } catch (const Error& e) {
    cleanup();
    out.exit_code = exit_for(e.code());
    out.message = e.what();
    return out;
  } catch (const std::exception& e) {
    cleanup();
    out.exit_code = exit_solver;
    out.message = e.what();
    return out;
  }
  out.exit_code = so.passed ? exit_ok : exit_acceptance;
  // Move the staged files into place.
  for (const auto& e : fs::directory_iterator(stage)) {
    const fs::path dst = root / e.path().filename();
    fs::remove_all(dst);
    fs::rename(e.path(), dst);
  }
  fs::remove_all(stage);
  write_manifest(root.string(), scenario_name(config.scenario), config_sha, so.passed, out.exit_code, so.summary);
  out.manifest_path = (root / "manifest.json").string();
  out.message = so.passed ? "pass" : "threshold not met";
  return out;
}

RunOutcome run_config_file(const std::string& path) {
  RunConfig c;
  try {
    c = load_run_config(path);
  } catch (const Error& e) {
    RunOutcome o;
    o.exit_code = exit_config;
    o.message = e.what();
    return o;
  }
  return run_scenario(c);
}

namespace {

std::string fmt(const nlohmann::json& v) {
  if (v.is_number_float()) {
    std::ostringstream os;
    os << std::setprecision(4) << v.get<double>();
    return os.str();
  }
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

void flatten(const nlohmann::json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else if (j.is_array() && !j.empty() && (j[0].is_object() || j.size() > 8)) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
  } else {
    out.emplace_back(prefix, fmt(j));
  }
}

std::string csv_as_markdown(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::ostringstream os;
  bool first = true;
  while (std::getline(in, line)) {
    std::string row = "| ";
    for (char ch : line) row += ch == ',' ? std::string(" | ") : std::string(1, ch);
    os << row << " |\n";
    if (first) {
      const auto cols = std::count(line.begin(), line.end(), ',') + 1;
      os << "|";
      for (long i = 0; i < cols; ++i) os << "---|";
      os << "\n";
      first = false;
    }
  }
  return os.str();
}

}  // namespace

std::string emit_report(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorCode::MissingArtifact, "missing manifest " + manifest_path);
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json j = ss.str().find_first_not_of(" \t\r\n") == std::string::npos ? nlohmann::json::object()
                                                                                   : nlohmann::json::parse(ss.str());
  const Manifest m = Manifest::from_json(j);
  const fs::path dir = fs::path(manifest_path).parent_path();
  std::ostringstream os;
  os << "# utm run report\n\n";
  if (m.scenario.empty() && m.files.empty()) return os.str();
  for (const auto& f : m.files)
    if (!fs::exists(dir / f.path)) throw Error(ErrorCode::MissingArtifact, "listed artifact missing: " + f.path);

  os << "scenario: " << m.scenario << "\n\n";
  if (fs::exists(dir / "config.json")) {
    std::ifstream cin(dir / "config.json");
    const nlohmann::json cj = nlohmann::json::parse(cin);
    std::vector<std::pair<std::string, std::string>> rows;
    for (const char* sec : {"spec", "grid", "data"})
      if (cj.contains(sec)) flatten(cj[sec], sec, rows);
    os << "## Parameters\n\n| key | value |\n|---|---|\n";
    for (const auto& [k, v] : rows) os << "| " << k << " | " << v << " |\n";
    os << "\n";
  }
  std::vector<std::pair<std::string, std::string>> rows;
  flatten(m.summary, "", rows);
  if (!rows.empty()) {
    os << "## Results\n\n| quantity | value |\n|---|---|\n";
    for (const auto& [k, v] : rows) os << "| " << k << " | " << v << " |\n";
    os << "\n";
  }
  for (const auto& f : m.files)
    if (fs::path(f.path).filename() == "residual.csv") {
      os << "## Residual vs resolution (" << f.path << ")\n\n" << csv_as_markdown(dir / f.path) << "\n";
    }
  os << "## Files\n\n";
  for (const auto& f : m.files) os << "- " << f.path << " (" << f.bytes << " bytes, sha256 " << f.sha256.substr(0, 16) << ")\n";
  os << "\n" << (m.passed ? "PASS" : "FAIL") << ": exit code " << m.exit_code << "\n";
  return os.str();
}

}  // namespace utm
