#pragma once

#include <string>
#include <utility>
#include <vector>

#include "anisolt/harness/config.hpp"
#include "json.hpp"

namespace anisolt::harness {

/// Everything an experiment produces, held in memory until the run succeeds.
struct ExperimentResult {
  std::vector<std::pair<std::string, std::string>> csv;  // file name, contents
  nlohmann::json summary = nlohmann::json::object();
  std::vector<std::string> flags;  // soft failures; the run exits 2 when non-empty
};

/// Runs one experiment family. Throws ConfigError on bad values and
/// InvalidArgument (or other exceptions) on numerical failure.
ExperimentResult run_experiment(const RunConfig& config);

ExperimentResult run_voronoi(const RunConfig& config);
ExperimentResult run_covering(const RunConfig& config);
ExperimentResult run_integral(const RunConfig& config);
ExperimentResult run_slnd(const RunConfig& config);
ExperimentResult run_localtime(const RunConfig& config);
ExperimentResult run_levelset(const RunConfig& config);
ExperimentResult run_she_verify(const RunConfig& config);

/// Shortest round-trip decimal form of a double ("nan", "inf" for
/// non-finite values).
std::string csv_number(double v);

}  // namespace anisolt::harness
