#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace utm {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  nlohmann::json data;  // inputs to the verdict; written as an artifact
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 20261015;
  std::string output = "utm_selftest";
  // Criterion 11 repeats criteria 1-10 with a different worker count and compares manifests.
  bool determinism = true;
  std::vector<int> only;  // empty: all
};

struct AcceptanceReport {
  std::vector<CriterionResult> results;
  bool all_passed = false;
  std::string manifest_path;
};

std::string format_line(const CriterionResult& r);

// Runs the criteria, writes one JSON per criterion and a manifest below options.output,
// and prints each line to progress as soon as it is known.
AcceptanceReport run_acceptance(const AcceptanceOptions& options, std::ostream* progress = nullptr);

}  // namespace utm
