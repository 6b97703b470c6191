#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "utm/cli_runner.hpp"
#include "utm/config.hpp"

using namespace utm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("utm_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

ErrorCode config_error(const std::string& text) {
  try {
    run_config_from_table(parse_config_text(text));
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("accepted: " << text);
  return ErrorCode::NonFinite;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// every number anywhere in j
void numbers(const nlohmann::json& j, std::vector<double>& out) {
  if (j.is_number()) out.push_back(j.get<double>());
  if (j.is_structured())
    for (const auto& v : j) numbers(v, out);
}

}  // namespace

TEST_CASE("config parsing") {
  const RunConfig c = run_config_from_table(parse_config_text(
      "scenario = \"pure_ibvp\"\n# comment\n[spec]\ngamma = 0.5\n[grid]\nN1 = 32\n[data]\ng = \"bump\"\n"));
  CHECK(c.scenario == Scenario::pure_ibvp);
  CHECK(c.spec.gamma == 0.5);
  CHECK(c.N1 == 32);
  CHECK(c.data.g == "bump");

  CHECK(config_error("scenario = \"nope\"\n") == ErrorCode::Config);
  CHECK(config_error("[data]\nu0 = \"triangle\"\n") == ErrorCode::Config);
  CHECK(config_error("[spec]\nwhatever = 1\n") == ErrorCode::Config);
  CHECK(config_error("[nosuchsection]\nx = 1\n") == ErrorCode::Config);
  CHECK(config_error("[spec]\ngamma = 1\ngamma = 2\n") == ErrorCode::Config);
  CHECK(config_error("[spec]\ngamma = \n") == ErrorCode::Config);
}

TEST_CASE("zero-data run succeeds and reports zero residuals") {
  const fs::path dir = scratch("zero");
  RunConfig c;
  c.output = dir.string();
  c.data.u0 = "zero";
  c.data.g = "zero";
  c.data.f = "zero";
  c.spec.gamma = -1.0;
  const RunOutcome r = run_scenario(c);
  REQUIRE(r.exit_code == exit_ok);
  REQUIRE(fs::exists(r.manifest_path));
  const nlohmann::json res = nlohmann::json::parse(slurp(dir / "residuals.json"));
  std::vector<double> v;
  numbers(res, v);
  REQUIRE(!v.empty());
  for (double x : v) CHECK(x == 0.0);
  CHECK(emit_report(r.manifest_path).find("PASS: exit code 0") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("malformed config exits with 2 and writes nothing") {
  const fs::path dir = scratch("malformed");
  fs::create_directories(dir);
  const fs::path cfg = dir / "bad.toml";
  std::ofstream(cfg) << "scenario = \"linear_manufactured\"\noutput = \"" << (dir / "out").string()
                     << "\"\n[data]\nu0 = \"triangle\"\n";
  const RunOutcome r = run_config_file(cfg.string());
  CHECK(r.exit_code == exit_config);
  CHECK(r.manifest_path.empty());
  CHECK_FALSE(fs::exists(dir / "out"));
  CHECK_FALSE(fs::exists(dir / "out.partial"));
  CHECK(run_config_file((dir / "absent.toml").string()).exit_code == exit_config);
  fs::remove_all(dir);
}

TEST_CASE("report of an empty manifest is the header alone") {
  const fs::path dir = scratch("empty");
  fs::create_directories(dir);
  std::ofstream(dir / "manifest.json") << "{}";
  CHECK(emit_report((dir / "manifest.json").string()) == "# utm run report\n\n");
  CHECK_THROWS_AS(emit_report((dir / "missing.json").string()), Error);
  fs::remove_all(dir);
}

TEST_CASE("relation audit writes a decreasing residual column and a table") {
  const fs::path dir = scratch("audit");
  RunConfig c;
  c.scenario = Scenario::global_relation_audit;
  c.output = dir.string();
  c.spec.gamma = -1.0;
  c.L1 = 20.0;
  c.N1 = 32;
  c.L2 = 16.0;
  c.N2 = 33;
  c.spec.T = 0.5;
  c.Nt = 17;
  c.levels = 2;
  c.samples = 30;
  c.tolerance = 1.0;
  c.min_gain = 1.0;
  const RunOutcome r = run_scenario(c);
  REQUIRE(r.exit_code == exit_ok);

  std::ifstream in(dir / "residual.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line.find("residual") != std::string::npos);
  std::vector<double> col;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    for (int k = 0; k <= 5 && std::getline(ss, cell, ','); ++k)
      if (k == 5) col.push_back(std::stod(cell));
  }
  REQUIRE(col.size() == 2);
  CHECK(col[1] < col[0]);

  const std::string rep = emit_report(r.manifest_path);
  CHECK(rep.find("## Residual vs resolution") != std::string::npos);
  CHECK(rep.find("| level |") != std::string::npos);
  CHECK(rep.find("PASS: exit code 0") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("a threshold the grid cannot reach exits with 4 and reports FAIL") {
  const fs::path dir = scratch("strict");
  RunConfig c;
  c.scenario = Scenario::global_relation_audit;
  c.output = dir.string();
  c.spec.gamma = -1.0;
  c.N1 = 32;
  c.L2 = 16.0;
  c.N2 = 33;
  c.Nt = 17;
  c.levels = 1;
  c.samples = 20;
  c.tolerance = 1e-12;
  const RunOutcome r = run_scenario(c);
  CHECK(r.exit_code == exit_acceptance);
  REQUIRE(fs::exists(r.manifest_path));
  CHECK(emit_report(r.manifest_path).find("FAIL: exit code 4") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("sha256 of known strings") {
  CHECK(sha256_text("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_text("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}
