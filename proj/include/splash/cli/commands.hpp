#pragma once

// The four subcommands. Each one resolves its configuration, writes its
// result files into the output directory and returns a short summary for the
// terminal. Result files embed the resolved configuration and carry no
// timing information, so identical inputs give byte-identical files.

#include <filesystem>
#include <string>
#include <vector>

#include "splash/cli/run_config.hpp"

namespace splash::cli {

inline constexpr int kSchemaVersion = 1;

struct CommandResult {
  std::vector<std::filesystem::path> files;
  std::string summary;
};

/// panel.csv and truth.json (A, B, Sigma_eps, C and metadata).
CommandResult cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir);
/// fit.json and groups.csv for the panel named by cfg.panel.
CommandResult cmd_estimate(const RunConfig& cfg, const std::filesystem::path& out_dir);
/// replicate.json and replicate.csv (one row per metric and method).
CommandResult cmd_replicate(const RunConfig& cfg, const std::filesystem::path& out_dir);
/// forecast_eval.json and forecast_eval.csv scored against PVAR.
CommandResult cmd_forecast_eval(const RunConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace splash::cli
