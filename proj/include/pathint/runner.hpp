#pragma once

#include <optional>
#include <ostream>
#include <string>

namespace pathint {

struct RunOptions {
    std::string config_path;
    std::optional<std::string> output_dir;  // overrides config and environment
    std::optional<int> threads;             // overrides environment
    bool check = false;                      // nonzero exit when thresholds fail
};

/// Executes the experiment described by a JSON config file and writes its
/// report CSVs, optional path dumps and a manifest echoing the resolved
/// config. Returns the process exit code: 0 on success, 1 when --check
/// finds a threshold violation, 2 on malformed JSON (with line/column in
/// the diagnostic), 3 on a semantic config error.
int run_experiment(const RunOptions& opts, std::ostream& out, std::ostream& err);

} // namespace pathint
