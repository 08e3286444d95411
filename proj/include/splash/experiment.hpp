#pragma once

// Monte Carlo driver: simulate a design, fit every configured estimator with
// per-replication tuning, and aggregate RMSFE and estimation errors.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "splash/eval.hpp"
#include "splash/model.hpp"

namespace splash {

enum class Design { A, B };
const char* to_string(Design d);
Design parse_design(const std::string& s);

/// Method identifiers accepted by make_estimator.
inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> ids{"splash0", "splash_alpha", "splash1", "gmwy_k0",
                                            "gmwy_cs", "pvar", "const"};
  return ids;
}

struct ExperimentConfig {
  Design design = Design::B;
  std::size_t n = 25;    // design A
  std::size_t k0 = 3;    // design A bandwidth
  std::size_t m = 5;     // design B grid side
  double interaction = 0.2;
  std::optional<double> b_diag;  // unset: 0.23 for m = 7, else 0.25
  std::size_t t = 1000;
  std::size_t reps = 50;
  std::size_t burn_in = 500;
  std::uint64_t seed = 1;
  std::vector<std::string> methods{"splash0", "splash_alpha", "splash1", "gmwy_k0", "gmwy_cs",
                                   "pvar"};
  CvGrid grid{};
  SplashSettings splash{};  // alpha is overridden per SPLASH variant

  std::size_t n_units() const { return design == Design::A ? n : m * m; }
  /// Bandwidth of the true A and B (k0, or m for the grid).
  std::size_t true_bandwidth() const { return design == Design::A ? k0 : m; }
  double resolved_b_diag() const { return b_diag ? *b_diag : (m == 7 ? 0.23 : 0.25); }
};

/// Design B model, or the design A draw for replication `rep`.
StModel experiment_model(const ExperimentConfig& cfg, std::size_t rep);

std::unique_ptr<Estimator> make_estimator(const std::string& id, const ExperimentConfig& cfg,
                                          const StModel& truth);

struct MethodSummary {
  std::string id;
  std::string label;
  double rmsfe = 0.0;
  std::optional<double> ee_a;  // structural estimators only
  std::optional<double> ee_b;
  std::optional<Mat> mean_abs_a;  // average |a-hat_ij| over replications
  /// Share of replications with a nonzero A diagonal group k (index k-1).
  std::vector<double> a_diagonal_selection;
};

struct ReplicationResult {
  std::size_t reps_requested = 0;
  std::size_t reps_used = 0;
  std::vector<std::size_t> excluded_reps;
  std::vector<std::string> exclusion_reasons;
  std::vector<MethodSummary> methods;
};

/// Replications run in parallel on independent random streams and are
/// reduced in replication order, so results do not depend on thread count.
/// A replication in which any estimator fails is excluded from every method.
ReplicationResult run_replication(const ExperimentConfig& cfg);

}  // namespace splash
