#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "utm/config.hpp"

namespace utm {

enum ExitCode { exit_ok = 0, exit_usage = 1, exit_config = 2, exit_solver = 3, exit_acceptance = 4 };

std::string sha256_file(const std::string& path);
std::string sha256_text(const std::string& text);

struct ManifestEntry {
  std::string path;  // relative to the manifest directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct Manifest {
  std::string scenario;
  std::string config_sha256;
  int exit_code = 0;
  bool passed = true;
  std::vector<ManifestEntry> files;
  nlohmann::json summary;

  nlohmann::json to_json() const;
  static Manifest from_json(const nlohmann::json& j);
};

struct RunOutcome {
  int exit_code = exit_ok;
  std::string manifest_path;  // empty when nothing was written
  std::string message;
};

// Stages every artifact in <output>.partial and moves it into place only when the run finishes,
// so a failed run leaves no partial outputs. Exit codes: 2 config, 3 solver, 4 failed threshold.
RunOutcome run_scenario(const RunConfig& config);
RunOutcome run_config_file(const std::string& path);

// Hashes every file under root (except the manifest itself) into root/manifest.json.
Manifest write_manifest(const std::string& root, const std::string& scenario, const std::string& config_sha,
                        bool passed, int exit_code, const nlohmann::json& summary);

// Markdown summary of a manifest; throws MissingArtifact when the manifest or a listed file is absent.
std::string emit_report(const std::string& manifest_path);

// Gnuplot commands for every CSV in the list.
std::string gnuplot_script(const std::vector<std::string>& csv_files);

}  // namespace utm
