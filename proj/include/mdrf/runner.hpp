#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdrf/config.hpp"

namespace mdrf {

struct RunOptions {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides oracle.seed
  int threads = 1;
};

const std::vector<std::string>& subcommands();

/// Executes one subcommand and writes results.csv, resolved-config.json and
/// report.json (plus weights.csv on request) into opts.out_dir. Rows whose
/// evaluation fails carry a status marker; the run continues.
void run_config(const std::string& subcommand, RunConfig cfg, const RunOptions& opts);

/// Loads the configuration, then runs. Returns the process exit status:
/// 0 on success, 2 for configuration or usage errors, 1 otherwise. The
/// message of a failure is stored in `error`.
int run(const std::string& subcommand, const std::string& config_path, const RunOptions& opts, std::string& error);

/// %.17g, with nan and inf spelled out.
std::string format_double(double v);

}  // namespace mdrf
