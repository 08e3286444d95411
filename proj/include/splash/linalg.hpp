#pragma once

// Dense row-major matrices and the handful of norms, spectral quantities and
// solvers the estimator needs. Sizes are desk-scale (N up to a few hundred),
// so everything is stored dense; banded matrices keep their bandwidth as
// metadata elsewhere.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

#include "splash/errors.hpp"

namespace splash {

using Vec = std::vector<double>;

class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Mat(std::size_t rows, std::size_t cols, std::vector<double> row_major);

  static Mat identity(std::size_t n);
  static Mat diagonal(std::span<const double> d);
  static Mat from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }
  Vec column(std::size_t j) const;

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const Mat&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// --- elementwise / structural ----------------------------------------------

Mat transpose(const Mat& m);
Mat operator+(const Mat& a, const Mat& b);
Mat operator-(const Mat& a, const Mat& b);
Mat operator*(double s, const Mat& m);
Mat hcat(const Mat& left, const Mat& right);
Mat select_columns(const Mat& m, std::span<const std::size_t> cols);

bool all_finite(const Mat& m) noexcept;
bool all_finite(std::span<const double> v) noexcept;
/// Throws InvalidArgument naming `what` if any entry is NaN or infinite.
void require_finite(const Mat& m, std::string_view what);

// --- products ---------------------------------------------------------------

/// OpenMP-parallel over output rows. Each output entry accumulates in the
/// same order as serial::matmul, so the two agree bit for bit.
Mat matmul(const Mat& a, const Mat& b);
Vec matvec(const Mat& a, std::span<const double> x);
/// a' * a without forming the transpose.
Mat gram(const Mat& a);

namespace serial {
Mat matmul(const Mat& a, const Mat& b);
}  // namespace serial

// --- norms ------------------------------------------------------------------

double norm_one(const Mat& m);       // max absolute column sum
double norm_inf(const Mat& m);       // max absolute row sum
double norm_one_inf(const Mat& m);   // max of the two above
double norm_max(const Mat& m);
double norm_frobenius(const Mat& m);
double norm2(std::span<const double> v);

/// Largest singular value by power iteration on m'm.
/// Stops once the Rayleigh residual of m'm drops below tol * max(1, estimate).
/// After max_iter steps without that, falls back to a Jacobi eigensolve of m'm.
double spectral_norm(const Mat& m, double tol = 1e-10, std::size_t max_iter = 10000);

// --- banding ----------------------------------------------------------------

/// Keep entry (i,j) iff |i-j| <= h.
Mat band(const Mat& m, std::size_t h);

// --- solvers ----------------------------------------------------------------

inline constexpr double kMaxCondition = 1e12;

/// LU with partial pivoting plus one step of iterative refinement.
/// Throws SingularMatrixError when a pivot vanishes or the 1-norm condition
/// estimate exceeds kMaxCondition.
Mat solve_linear(const Mat& a, const Mat& b);
Vec solve_linear(const Mat& a, std::span<const double> b);

/// Hager/Higham estimate of the 1-norm condition number. +inf if singular.
double condition_estimate(const Mat& a);

struct SymmetricEigen {
  Vec values;    // ascending
  Mat vectors;   // column k pairs with values[k]
};

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
SymmetricEigen symmetric_eigen(const Mat& s, double tol = 1e-14, std::size_t max_sweeps = 100);

/// Minimum-norm solution of s x = b for symmetric PSD s, dropping eigenvalues
/// below rel_tol * largest.
Vec pseudo_solve_symmetric(const Mat& s, std::span<const double> b, double rel_tol = 1e-12);

}  // namespace splash
