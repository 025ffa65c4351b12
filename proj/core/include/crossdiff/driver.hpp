#pragma once

#include <string>

#include "crossdiff/config.hpp"

namespace crossdiff {

/// Batch front door shared by the CLI binary and the tests.
struct CliOptions {
    std::string config_path;
    std::string out_override;     // --out
    std::string study_override;   // --study
    int workers = 1;              // --workers, study fan-out bound
    bool verbose = false;         // --verbose
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;       // usage / IO / config validation
inline constexpr int kExitViolation = 2;   // invariant violation or step failure

/// Parse, run (simulation or study), write the run directory (effective
/// config, diagnostics CSV, step log, snapshots, summary.json plus a separate
/// run_meta.json for timestamps) and return the exit status. The summary is
/// byte-identical across reruns of the same config and binary.
int run_cli(const CliOptions& opts);

}  // namespace crossdiff
