#pragma once

// Flat run configuration shared by every subcommand. The text form is one
// `key = value` pair per line ('#' starts a comment, lists are comma
// separated). Command-line flags use the same keys with '-' for '_'.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "splash/errors.hpp"
#include "splash/eval.hpp"
#include "splash/experiment.hpp"

namespace splash::cli {

/// Invalid configuration; field() names the offending key.
class UsageError : public InvalidArgument {
 public:
  UsageError(const std::string& field, const std::string& what)
      : InvalidArgument(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class BandwidthMode { Bootstrap, Fixed };

struct RunConfig {
  // model and simulation
  Design design = Design::B;
  std::size_t n = 25;
  std::size_t k0 = 3;
  std::size_t m = 5;
  double interaction = 0.2;
  std::optional<double> b_diag;  // auto: 0.23 for m = 7, else 0.25
  std::size_t t = 1000;
  std::size_t burn_in = 500;
  std::size_t reps = 50;
  std::uint64_t seed = 1;

  // SPLASH
  BandwidthMode bandwidth_mode = BandwidthMode::Bootstrap;
  std::optional<std::size_t> bandwidth;  // required for fixed mode
  std::vector<std::size_t> h_grid;       // empty: cap..N-1
  std::size_t n_boot = 50;
  std::size_t block_len = 0;  // 0: ceil(T^(1/3))
  std::size_t cap = 0;        // 0: floor(N/4)
  std::optional<double> alpha;   // estimate: unset tunes alpha over `alphas`
  std::optional<double> lambda;  // estimate: unset selects lambda by CV
  double tol = 1e-8;
  std::size_t max_iter = 50'000;

  // tuning
  std::vector<double> lambdas;  // empty: automatic path
  std::vector<double> alphas{0.0, 0.25, 0.5, 0.75, 1.0};
  std::size_t n_lambda = 20;
  double lambda_ratio = 1e-4;
  double train_frac = 0.8;

  // methods and evaluation
  std::vector<std::string> methods;  // empty: the command's default list
  double window_frac = 0.8;
  std::vector<Loss> loss{Loss::Squared, Loss::Absolute};

  // input
  std::string panel;  // panel CSV for estimate / forecast-eval
  bool interpolate = false;
  bool demean = true;  // estimate: subtract unit means before fitting

  bool operator==(const RunConfig&) const = default;
};

/// Every accepted key, in emission order.
const std::vector<std::string>& config_keys();

/// Sets one field from its text form; throws UsageError naming the key.
void set_field(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get_field(const RunConfig& cfg, const std::string& key);

/// Applies `key = value` lines on top of cfg.
void apply_config_text(RunConfig& cfg, const std::string& text);
RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);
/// Canonical text: every key once, in config_keys() order.
std::string emit_config(const RunConfig& cfg);

enum class Command { Simulate, Estimate, Replicate, ForecastEval };
const char* to_string(Command c);

/// Default method list per command.
std::vector<std::string> default_methods(Command c);
/// Fills command defaults (method list, b_diag) and checks every field the
/// command reads.
RunConfig resolve(const RunConfig& cfg, Command c);

ExperimentConfig to_experiment(const RunConfig& cfg);
CvGrid to_grid(const RunConfig& cfg);
SplashSettings to_splash(const RunConfig& cfg);

}  // namespace splash::cli
