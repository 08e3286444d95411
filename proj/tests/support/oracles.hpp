#pragma once

// Reference implementations used only by the test suites. They share no
// numerical code with the library: dense Gaussian elimination, one-sided
// Jacobi SVD, Kronecker-form Lyapunov solves, a proximal-gradient sparse
// group lasso and a plain lasso coordinate descent.

#include <cstddef>
#include <vector>

#include "splash/linalg.hpp"
#include "splash/yule_walker.hpp"

namespace oracle {

using splash::Mat;
using splash::Vec;

/// Gaussian elimination with partial pivoting, column by column.
Mat gauss_solve(Mat a, Mat b);
Vec gauss_solve(const Mat& a, const Vec& b);

/// Least squares through the normal equations x'x c = x'y.
Vec normal_equations(const Mat& x, const Vec& y);

/// Singular values, descending, by one-sided Jacobi rotations.
std::vector<double> singular_values(const Mat& m);
double largest_singular_value(const Mat& m);

/// Solves S = C S C' + Q through vec(S) = (I - C kron C)^{-1} vec(Q).
Mat lyapunov(const Mat& c, const Mat& q);

struct SglProblem {
  Mat v;                                   // dense block-diagonal design
  Vec target;
  std::vector<std::vector<std::size_t>> groups;
  std::vector<double> weights;
};

SglProblem dense_problem(const splash::YwSystem& sys);

double sgl_objective(const SglProblem& p, const Vec& c, double lambda, double alpha);

/// Accelerated proximal gradient (FISTA with function-value restart) at the
/// exact step 1 / (2 ||V||_2^2). The sparse-group prox is applied in closed
/// form: soft threshold, then group shrinkage.
Vec sgl_proximal_gradient(const SglProblem& p, double lambda, double alpha,
                          std::size_t max_iter = 2'000'000, double tol = 1e-15);

/// Cyclic coordinate descent for ||y - V c||^2 + lambda ||c||_1.
Vec lasso_cd(const Mat& v, const Vec& y, double lambda, std::size_t max_sweeps = 1'000'000,
             double tol = 1e-14);

}  // namespace oracle
