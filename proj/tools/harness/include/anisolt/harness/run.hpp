#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "anisolt/harness/config.hpp"

namespace anisolt::harness {

enum ExitCode : int { exit_ok = 0, exit_error = 1, exit_flagged = 2, exit_mismatch = 3, exit_usage = 64 };

/// Runs the experiment and, only if it completes, writes summary.json, the
/// CSV files and manifest.json into `out`. Returns exit_ok or exit_flagged.
/// Exceptions propagate; nothing is written in that case.
int run(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);

struct ReplayResult {
  bool identical = true;
  std::vector<std::string> compared;
  std::vector<std::string> differing;
};

/// Re-runs the configuration recorded in a manifest (optionally with a
/// different thread count or seed) and byte-compares its CSV files and
/// summary.json with the recorded ones. Throws std::runtime_error when the
/// manifest or a recorded file is missing.
ReplayResult replay(const std::filesystem::path& manifest, std::optional<unsigned> threads = std::nullopt,
                    std::optional<std::uint64_t> seed = std::nullopt);

const char* version();

}  // namespace anisolt::harness
