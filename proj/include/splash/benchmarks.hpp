#pragma once

// Comparison estimators: generalized Yule-Walker least squares on a fixed
// support (GMWY), the L1-penalised reduced-form VAR (PVAR) and the
// window-mean forecaster (CONST).
//
// GMWY works on the unbanded sample autocovariances, whereas SPLASH bands
// them first. The asymmetry is intentional.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "splash/linalg.hpp"
#include "splash/model.hpp"
#include "splash/simulate.hpp"
#include "splash/yule_walker.hpp"

namespace splash {

class SupportSet {
 public:
  SupportSet() = default;
  /// Throws InvalidArgument on (A,i,i) entries or indices >= n.
  SupportSet(std::size_t n, std::vector<CoefKey> entries);

  /// Every (A,i,j), i != j, and (B,i,j) with |i-j| <= k.
  static SupportSet banded(std::size_t n, std::size_t k);
  /// Nonzero entries of the model's A and B.
  static SupportSet from_model(const StModel& m);

  std::size_t n_units() const noexcept { return n_; }
  const std::vector<CoefKey>& entries() const noexcept { return entries_; }
  /// Entries of row i in equation order: A by ascending j, then B.
  std::vector<CoefKey> equation(std::size_t i) const;

 private:
  std::size_t n_ = 0;
  std::vector<CoefKey> entries_;  // sorted by (i, matrix, j), unique
};

struct GmwyFit {
  Mat a;
  Mat b;
  /// Equations whose normal matrix was too ill-conditioned for LU and were
  /// solved by minimum-norm pseudo-inverse instead.
  std::vector<std::size_t> pseudo_inverse_equations;
};

/// Per-equation least squares sigma_i ~ V_i c on the unbanded autocovariances,
/// restricted to the supported columns.
GmwyFit gmwy_fit(const Panel& p, const SupportSet& support);
GmwyFit gmwy_fit(const AcovPair& acov, const SupportSet& support);

struct PvarFit {
  Mat c;
  double lambda = 0.0;
  std::size_t n_iter = 0;  // most sweeps used by any row
  double kkt_residual = 0.0;
};

/// Row-separable lasso  sum_t ||y_t - C y_{t-1}||^2 + lambda * sum |c_ij|
/// solved by cyclic coordinate descent on the cross-product matrices, which
/// are formed once per panel.
class PvarProblem {
 public:
  explicit PvarProblem(const Panel& p);

  /// max_i max_j |2 (X'y_i)_j|: the smallest lambda giving C = 0.
  double lambda_max() const;
  PvarFit fit(double lambda, double tol = 1e-8, std::size_t max_iter = 100'000,
              const Mat* warm_start = nullptr) const;
  /// Objective of one row's subproblem, up to the constant y_i'y_i.
  double row_objective(std::size_t i, std::span<const double> ci, double lambda) const;

 private:
  std::size_t n_ = 0;
  Mat xtx_;  // sum_t y_{t-1} y_{t-1}'
  Mat xty_;  // row i: sum_t y_{i,t} y_{t-1}
};

PvarFit pvar_fit(const Panel& p, double lambda, double tol = 1e-8,
                 std::size_t max_iter = 100'000);

/// Per-unit time mean of the window.
Vec const_forecast(const Panel& p);

/// (I - A)^{-1} B, throwing SingularMatrixError when I - A is singular.
Mat transition_matrix(const Mat& a_hat, const Mat& b_hat);
/// (I - A)^{-1} B y_last.
Vec forecast_one_step(const Mat& a_hat, const Mat& b_hat, std::span<const double> y_last);

}  // namespace splash
