#pragma once

// The structural model y_t = A y_t + B y_{t-1} + eps_t, its reduced form
// y_t = C y_{t-1} + D eps_t, and the population autocovariances that serve as
// the exactness oracle for the estimation pipeline.

#include <cstddef>
#include <string>
#include <vector>

#include "splash/linalg.hpp"

namespace splash {

struct StModel {
  Mat a;          // contemporaneous spatial matrix, zero diagonal
  Mat b;          // temporal matrix
  Mat sigma_eps;  // innovation covariance
  std::size_t bandwidth_k = 0;   // a_ij = b_ij = 0 for |i-j| > k
  std::size_t bandwidth_l0 = 0;  // sigma_ij = 0 for |i-j| > l0

  std::size_t n() const noexcept { return a.rows(); }
};

/// Returns the list of violated invariants (empty when the model is valid).
std::vector<std::string> model_violations(const StModel& m);
/// Throws InvalidArgument listing every violation.
void validate(const StModel& m);

struct ReducedForm {
  Mat c;  // (I - A)^{-1} B
  Mat d;  // (I - A)^{-1}
};

struct StabilityReport {
  double delta_a = 0.0;
  double norm_a = 0.0;        // ||A||_{1 v inf}
  double norm_b = 0.0;        // ||B||_{1 v inf}, used as C_B
  bool a_bounded = false;     // ||A||_{1 v inf} <= delta_a
  bool b_contracts = false;   // C_B / (1 - ||A||) < 1
  double spectral_norm_c = 0.0;  // NaN when I - A is singular
  bool passes() const noexcept { return a_bounded && b_contracts; }
};

/// Non-throwing on failing clauses: simulation code uses the report to decide
/// whether to redraw.
StabilityReport check_stability(const StModel& m, double delta_a);

ReducedForm reduced_form(const StModel& m);

/// Lag 0: fixed point of S <- C S C' + D Sigma D' iterated until the max-norm
/// change is <= tol. Lag j >= 1: C^j S_0.
Mat population_autocov(const ReducedForm& rf, const Mat& sigma_eps, std::size_t lag,
                       double tol = 1e-12, std::size_t max_iter = 1'000'000);

}  // namespace splash
