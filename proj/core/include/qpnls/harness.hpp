#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qpnls {

/// Result of one configured experiment run (or sweep of runs).
struct RunOutcome {
  int exit_code = 0;          // 0 on success; error.json written otherwise
  bool resumed = false;       // true when a matching manifest was reused
  std::string kind;           // experiment kind from the config
  std::string out_dir;
  std::string manifest_path;  // empty when the run failed
  std::string error_path;     // empty when the run succeeded
  std::vector<std::string> outputs;  // paths relative to out_dir
};

/// Runs the experiment described by the JSON config file: builds the grid,
/// potential, and initial state, dispatches on "kind" (evolve, linear-test,
/// dispersion-fit, weights, gn-check, scattering, wave-operator, sweep,
/// check-condition), writes the outputs plus a manifest with content hashes
/// into out_dir, and never throws — failures are reported through error.json
/// and the exit code.  With resume set, a manifest from an identical resolved
/// config (including seed) short-circuits the run.
RunOutcome run_experiment(const std::string& config_path,
                          const std::string& out_dir, std::uint64_t seed,
                          bool resume);

/// Same, but the configuration is passed as JSON text.
RunOutcome run_experiment_text(const std::string& config_text,
                               const std::string& out_dir, std::uint64_t seed,
                               bool resume);

}  // namespace qpnls
