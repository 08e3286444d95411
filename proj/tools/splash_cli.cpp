// splash: simulate, estimate, replicate and forecast-eval subcommands.
//
// Settings are applied in order: built-in defaults, then --config <file>
// (key = value lines), then individual flags.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "splash/cli/commands.hpp"
#include "splash/cli/panel_io.hpp"
#include "splash/cli/run_config.hpp"

namespace {

using splash::cli::Command;
using splash::cli::RunConfig;

const std::map<std::string, std::string>& help_text() {
  static const std::map<std::string, std::string> h{
      {"design", "simulation design: A (random banded) or B (grid)"},
      {"n", "number of units, design A"},
      {"k0", "bandwidth of A and B, design A"},
      {"m", "grid side, design B (N = m^2)"},
      {"interaction", "neighbour coefficient in A, design B"},
      {"b_diag", "diagonal of B, design B (auto: 0.23 for m = 7, else 0.25)"},
      {"t", "time points per panel"},
      {"burn_in", "discarded burn-in steps"},
      {"reps", "Monte Carlo replications"},
      {"seed", "random seed"},
      {"bandwidth_mode", "fixed | bootstrap (data-driven banding level)"},
      {"bandwidth", "banding level h for fixed mode"},
      {"h_grid", "candidate banding levels (auto: cap..N-1)"},
      {"n_boot", "sample splits used by the bandwidth selector"},
      {"block_len", "gap between the split segments (0: ceil(T^(1/3)))"},
      {"cap", "largest diagonal in the groups (0: floor(N/4))"},
      {"alpha", "fixed alpha for estimate (auto: cross-validated)"},
      {"lambda", "fixed lambda for estimate (auto: cross-validated)"},
      {"tol", "solver tolerance"},
      {"max_iter", "solver sweep limit"},
      {"lambdas", "explicit descending lambda grid (auto: path from lambda_max)"},
      {"alphas", "alpha grid for cross-validation"},
      {"n_lambda", "points on the automatic lambda path"},
      {"lambda_ratio", "smallest lambda as a fraction of lambda_max"},
      {"train_frac", "training share of the cross-validation split"},
      {"methods", "comma-separated method ids (auto: command default)"},
      {"window_frac", "rolling window length as a share of T"},
      {"loss", "losses scored by forecast-eval: squared, absolute"},
      {"panel", "panel CSV file"},
      {"interpolate", "fill missing panel cells by linear interpolation"},
      {"demean", "subtract unit means before estimating"},
  };
  return h;
}

struct SubcommandState {
  CLI::App* app = nullptr;
  Command command;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
  std::string config_file;
  std::string out_dir = "out";
};

std::string dashed(std::string key) {
  for (char& ch : key)
    if (ch == '_') ch = '-';
  return key;
}

bool is_bool_key(const std::string& key) { return key == "interpolate" || key == "demean"; }

void add_config_options(SubcommandState& st) {
  for (const auto& key : splash::cli::config_keys()) {
    const auto it = help_text().find(key);
    const std::string help = it == help_text().end() ? key : it->second;
    if (is_bool_key(key)) {
      st.app->add_flag("--" + dashed(key) + ",!--no-" + dashed(key), st.flags[key], help);
    } else {
      st.app->add_option("--" + dashed(key), st.values[key], help);
    }
  }
  st.app->add_option("--config", st.config_file, "key = value configuration file");
  st.app->add_option("--out", st.out_dir, "output directory")->capture_default_str();
}

RunConfig build_config(const SubcommandState& st) {
  RunConfig cfg;
  if (!st.config_file.empty()) cfg = splash::cli::load_config_file(st.config_file);
  for (const auto& key : splash::cli::config_keys()) {
    const std::string flag = "--" + dashed(key);
    if (st.app->count(flag) == 0 && !(is_bool_key(key) && st.app->count("--no-" + dashed(key))))
      continue;
    if (is_bool_key(key))
      splash::cli::set_field(cfg, key, st.flags.at(key) ? "true" : "false");
    else
      splash::cli::set_field(cfg, key, st.values.at(key));
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SPLASH estimation of spatio-temporal vector autoregressions"};
  app.require_subcommand(1);

  std::vector<SubcommandState> subs(4);
  const std::pair<const char*, const char*> specs[] = {
      {"simulate", "simulate a design and write panel.csv and truth.json"},
      {"estimate", "fit SPLASH to a panel CSV and write fit.json and groups.csv"},
      {"replicate", "run the Monte Carlo and write replicate.json and replicate.csv"},
      {"forecast-eval", "rolling-window forecast comparison against PVAR"},
  };
  const Command commands[] = {Command::Simulate, Command::Estimate, Command::Replicate,
                              Command::ForecastEval};
  std::string panel_positional[4];
  for (std::size_t k = 0; k < 4; ++k) {
    subs[k].app = app.add_subcommand(specs[k].first, specs[k].second);
    subs[k].command = commands[k];
    add_config_options(subs[k]);
    if (commands[k] == Command::Estimate || commands[k] == Command::ForecastEval)
      subs[k].app->add_option("panel_file", panel_positional[k], "panel CSV (same as --panel)");
  }

  CLI11_PARSE(app, argc, argv);

  for (std::size_t k = 0; k < 4; ++k) {
    SubcommandState& st = subs[k];
    if (!st.app->parsed()) continue;
    try {
      RunConfig cfg = build_config(st);
      if (!panel_positional[k].empty()) cfg.panel = panel_positional[k];
      splash::cli::CommandResult res;
      switch (st.command) {
        case Command::Simulate: res = splash::cli::cmd_simulate(cfg, st.out_dir); break;
        case Command::Estimate: res = splash::cli::cmd_estimate(cfg, st.out_dir); break;
        case Command::Replicate: res = splash::cli::cmd_replicate(cfg, st.out_dir); break;
        case Command::ForecastEval: res = splash::cli::cmd_forecast_eval(cfg, st.out_dir); break;
      }
      std::cout << res.summary;
      for (const auto& f : res.files) std::cout << "wrote " << f.string() << '\n';
      return 0;
    } catch (const splash::cli::UsageError& e) {
      std::cerr << "usage error: " << e.what() << '\n';
      return 2;
    } catch (const splash::cli::ParseError& e) {
      std::cerr << "parse error: " << e.what() << '\n';
      return 3;
    } catch (const splash::SplashError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return 0;
}
