// utm: run a scenario config, summarize a manifest, or run the acceptance suite.
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "utm/acceptance.hpp"
#include "utm/cli_runner.hpp"
#include "utm/core_model.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Unified-transform solver for Schrodinger IBVPs on the half-plane"};
  app.require_subcommand(1);

  std::string config;
  auto* run = app.add_subcommand("run", "Solve one scenario described by a TOML config");
  run->add_option("config", config, "config file")->required();

  std::string manifest;
  auto* report = app.add_subcommand("report", "Markdown summary of a run manifest");
  report->add_option("manifest", manifest, "manifest.json")->required();

  utm::AcceptanceOptions acc;
  auto* self = app.add_subcommand("selftest", "Run acceptance criteria 1-11");
  self->add_option("--seed", acc.seed, "random seed");
  self->add_option("--out", acc.output, "output directory");
  self->add_option("--only", acc.only, "criterion ids to run");
  self->add_flag("!--no-determinism", acc.determinism, "skip the determinism rerun");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : utm::exit_usage;
  }

  if (*run) {
    const utm::RunOutcome r = utm::run_config_file(config);
    if (!r.message.empty()) (r.exit_code == 0 ? std::cout : std::cerr) << r.message << "\n";
    if (!r.manifest_path.empty()) std::cout << "manifest: " << r.manifest_path << "\n";
    return r.exit_code;
  }
  if (*report) {
    try {
      std::cout << utm::emit_report(manifest);
      return utm::exit_ok;
    } catch (const utm::Error& e) {
      std::cerr << e.what() << "\n";
      return utm::exit_config;
    }
  }
  const utm::AcceptanceReport r = utm::run_acceptance(acc, &std::cout);
  int failed = 0;
  for (const auto& c : r.results) failed += !c.passed;
  std::cout << (r.all_passed ? "ALL PASS" : std::to_string(failed) + " criteria failed") << "; manifest "
            << r.manifest_path << "\n";
  return r.all_passed ? utm::exit_ok : utm::exit_acceptance;
}
