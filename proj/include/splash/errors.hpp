#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace splash {

class SplashError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public SplashError {
 public:
  using SplashError::SplashError;
};

class SingularMatrixError : public SplashError {
 public:
  SingularMatrixError(const std::string& what, double condition_estimate)
      : SplashError(what), condition_estimate_(condition_estimate) {}

  /// Estimated 1-norm condition number; +inf when a pivot vanished.
  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

/// Thrown by iterative routines that hit their iteration budget. Carries the
/// last iterate so callers can inspect or resume.
class ConvergenceError : public SplashError {
 public:
  ConvergenceError(const std::string& what, std::vector<double> last_iterate,
                   double residual, std::size_t iterations)
      : SplashError(what),
        last_iterate_(std::move(last_iterate)),
        residual_(residual),
        iterations_(iterations) {}

  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
  double residual() const noexcept { return residual_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::vector<double> last_iterate_;
  double residual_;
  std::size_t iterations_;
};

}  // namespace splash
