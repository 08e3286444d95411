#pragma once

// Tuning, forecasting and scoring. Estimators are exposed behind one
// interface so cross-validation, rolling windows and the Monte Carlo driver
// treat SPLASH, PVAR, GMWY and CONST alike.

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "splash/benchmarks.hpp"
#include "splash/linalg.hpp"
#include "splash/rng.hpp"
#include "splash/simulate.hpp"
#include "splash/solver.hpp"

namespace splash {

struct CvGrid {
  /// Absolute lambdas, descending. Empty: a per-alpha path of n_lambda
  /// points from lambda_max down to lambda_ratio * lambda_max.
  std::vector<double> lambdas;
  std::vector<double> alphas{0.0, 0.25, 0.5, 0.75, 1.0};
  double train_frac = 0.8;
  std::size_t n_lambda = 20;
  double lambda_ratio = 1e-4;

  void validate() const;
};

struct EstimateResult {
  Mat transition;  // C-hat
  Vec intercept;   // zero except for CONST
  std::optional<Mat> a_hat;
  std::optional<Mat> b_hat;
  double lambda = 0.0;
  std::optional<double> alpha;
  std::optional<std::size_t> bandwidth;  // banding level used by SPLASH
};

/// intercept + transition * y_last
Vec forecast(const EstimateResult& r, std::span<const double> y_last);

class Estimator {
 public:
  virtual ~Estimator() = default;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<Estimator> clone() const = 0;
  virtual bool tunable() const { return false; }
  /// Alpha values searched during tuning.
  virtual std::vector<double> alphas(const CvGrid&) const { return {1.0}; }
  /// Data-dependent settings fixed once per panel before tuning (SPLASH picks
  /// its banding level here). The default returns an unchanged copy.
  virtual std::unique_ptr<Estimator> adapt(const Panel& p, RngSpec rng) const;
  virtual double lambda_max(const Panel&, double) const { return 0.0; }
  /// One result per lambda (descending); a failed point is left empty.
  virtual std::vector<std::optional<EstimateResult>> fit_path(
      const Panel& train, double alpha, std::span<const double> lambdas) const;
  virtual EstimateResult fit(const Panel& p, double lambda, double alpha) const = 0;
};

struct SplashSettings {
  std::optional<double> alpha;           // fixed alpha; unset: tuned over the grid
  std::size_t cap = 0;                   // 0: floor(N/4)
  std::optional<std::size_t> bandwidth;  // fixed h; unset: data-driven selection
  std::vector<std::size_t> h_grid;       // empty: cap..N-1
  std::size_t n_boot = 50;
  std::size_t block_len = 0;             // 0: ceil(T^(1/3))
  SolverOptions solver{};
};

class SplashEstimator final : public Estimator {
 public:
  explicit SplashEstimator(SplashSettings s) : s_(std::move(s)) {}
  std::string name() const override;
  std::unique_ptr<Estimator> clone() const override;
  bool tunable() const override { return true; }
  std::vector<double> alphas(const CvGrid& g) const override;
  std::unique_ptr<Estimator> adapt(const Panel& p, RngSpec rng) const override;
  double lambda_max(const Panel& train, double alpha) const override;
  std::vector<std::optional<EstimateResult>> fit_path(
      const Panel& train, double alpha, std::span<const double> lambdas) const override;
  EstimateResult fit(const Panel& p, double lambda, double alpha) const override;

  const SplashSettings& settings() const noexcept { return s_; }
  /// Banded system for the panel under the current settings.
  YwSystem system(const Panel& p) const;
  std::size_t resolved_cap(std::size_t n) const;
  std::size_t resolved_bandwidth(std::size_t n) const;

 private:
  EstimateResult to_result(const SplashFit& f, std::size_t n, std::size_t h) const;
  SplashSettings s_;
};

class PvarEstimator final : public Estimator {
 public:
  explicit PvarEstimator(double tol = 1e-8) : tol_(tol) {}
  std::string name() const override { return "PVAR"; }
  std::unique_ptr<Estimator> clone() const override;
  bool tunable() const override { return true; }
  double lambda_max(const Panel& train, double alpha) const override;
  std::vector<std::optional<EstimateResult>> fit_path(
      const Panel& train, double alpha, std::span<const double> lambdas) const override;
  EstimateResult fit(const Panel& p, double lambda, double alpha) const override;

 private:
  double tol_;
};

class GmwyEstimator final : public Estimator {
 public:
  GmwyEstimator(std::string label, SupportSet support)
      : label_(std::move(label)), support_(std::move(support)) {}
  std::string name() const override { return label_; }
  std::unique_ptr<Estimator> clone() const override;
  EstimateResult fit(const Panel& p, double lambda, double alpha) const override;

 private:
  std::string label_;
  SupportSet support_;
};

class ConstEstimator final : public Estimator {
 public:
  std::string name() const override { return "CONST"; }
  std::unique_ptr<Estimator> clone() const override;
  EstimateResult fit(const Panel& p, double lambda, double alpha) const override;
};

struct CvChoice {
  double lambda = 0.0;
  double alpha = 0.0;
  /// lambda / lambda_max on the training segment; set for automatic paths.
  std::optional<double> ratio;
  double score = 0.0;  // validation mean squared one-step error
};

/// Training segment = first ceil(train_frac * T) columns; every grid point is
/// scored by the mean squared one-step error of that single fit over the
/// remaining columns. Ties prefer the larger lambda, then the smaller alpha.
CvChoice ts_cross_validate(const Panel& p, const CvGrid& grid, const Estimator& est);

struct TunedFit {
  EstimateResult result;
  std::optional<CvChoice> choice;
};

/// adapt -> cross-validate (tunable estimators only) -> refit on the whole
/// panel. Automatic paths refit at the chosen fraction of the full-panel
/// lambda_max; explicit lambda grids refit at the chosen lambda itself.
TunedFit tune_and_fit(const Panel& p, const CvGrid& grid, const Estimator& est, RngSpec rng);

struct RmsfeCase {
  Mat c;       // true transition
  Vec y_t;     // last in-sample observation
  Vec y_next;  // realised next value
};

/// sum_j ||y_next - C-hat_j y_t||^2 / sum_j ||y_next - C y_t||^2
double rmsfe(std::span<const Mat> c_hats, std::span<const RmsfeCase> truths);
/// Same ratio with arbitrary forecasts in the numerator.
double rmsfe_from_forecasts(std::span<const Vec> forecasts, std::span<const RmsfeCase> truths);

/// Mean over replications of ||est_j - truth||_2.
double estimation_error(std::span<const Mat> est, const Mat& truth);

enum class Loss { Squared, Absolute };
const char* to_string(Loss l);
Loss parse_loss(const std::string& s);
double apply_loss(Loss l, double e);

struct DmResult {
  double stat = 0.0;
  double p_value = 1.0;
};

/// d_t = L(e1_t) - L(e2_t); stat = mean(d) / sqrt(lrv / n) with a Bartlett
/// long-run variance at lag floor(n^(1/3)); two-sided normal p-value.
/// Negative stat: e1 has the lower loss.
DmResult dm_test(std::span<const double> e1, std::span<const double> e2, Loss loss);

struct ForecastRecord {
  std::string method;
  std::size_t window_length = 0;
  Mat errors;  // n_windows x n_units, NaN where the window failed
  std::vector<std::size_t> missing_windows;
  std::vector<std::string> failures;  // one message per missing window
  double elapsed_seconds = 0.0;       // informational; not written to result files

  std::size_t n_windows() const noexcept { return errors.rows(); }
};

inline std::size_t rolling_window_length(std::size_t t, double window_frac) {
  return static_cast<std::size_t>(std::ceil(window_frac * static_cast<double>(t) - 1e-9));
}

/// Window w covers columns [w, w + L) and forecasts column w + L, giving
/// T - L windows. Per window: demean, tune, fit, forecast, add means back.
ForecastRecord rolling_windows(const Panel& p, double window_frac, const Estimator& est,
                               const CvGrid& grid, RngSpec rng);

struct ScoreRow {
  std::string method;
  Loss loss = Loss::Squared;
  std::size_t n_units = 0;
  std::size_t n_windows = 0;  // windows present in both records
  std::size_t wins = 0;
  std::size_t significant_wins = 0;
  double relative_loss = 1.0;  // sum of unit mean losses over the benchmark's
};

/// Per method: units with a lower mean loss than the benchmark, units where
/// that difference is significant (DM, two-sided 5%), and the relative loss.
/// Only windows present in both records count. With fewer than 10 common
/// windows the significance column stays zero.
std::vector<ScoreRow> score_table(std::span<const ForecastRecord> records,
                                  const ForecastRecord& benchmark, Loss loss);

}  // namespace splash
