#pragma once

#include <cstdint>
#include <string>

namespace murraynet {

struct RunConfig {
  std::string command;      // solve | optimize | check-murray | solve-continuum
                            // | check-continuum-murray | solve-phenom
                            // | check-phenom-murray | selftest
  std::string config_path;  // TOML run config; only selftest may omit it
  std::string out_dir = ".";
  std::uint64_t seed = 0;   // randomized self-tests only
  bool quiet = false;       // silences stdout, never error reporting
};

// Executes one batch command, writing artifacts plus run_manifest.json into
// out_dir. Returns the process exit code: 0 success, 2 bad parameters,
// 3 malformed input files, 4 solver failure / failed self-checks, 5 other.
// Errors also emit a JSON object {"error": {"type", "message"}} on stderr.
int run(const RunConfig& config);

}  // namespace murraynet
