#pragma once

// Sparse group lasso over the diagonal groups of A and B:
//
//   L(c) = ||sigma - V c||_2^2 + lambda * P_alpha(c)
//   P_alpha(c) = (1 - alpha) * sum_g sqrt(|g|) ||c_g||_2 + alpha * ||c||_1
//
// The loss is unnormalised, so the smooth gradient is 2 V'(V c - sigma) and
// lambda_max / KKT checks carry the factor 2.

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "splash/linalg.hpp"
#include "splash/yule_walker.hpp"

namespace splash {

struct SolverOptions {
  double tol = 1e-8;              // max coefficient change per sweep
  std::size_t max_iter = 50'000;  // sweeps over all groups
  bool track_objective = false;   // record objective after every sweep
};

struct SplashFit {
  Vec c_hat;
  Mat a_hat;
  Mat b_hat;
  double lambda = 0.0;
  double alpha = 0.0;
  double objective = 0.0;
  std::size_t n_iter = 0;
  double kkt_residual = 0.0;
  std::vector<double> objective_trace;  // filled when track_objective is set
};

double penalty(std::span<const double> c, double alpha, const GroupLayout& layout);
/// ||sigma - V^(d) c||^2 evaluated block by block from the raw system.
double loss(const YwSystem& sys, std::span<const double> c);
double objective(const YwSystem& sys, std::span<const double> c, double lambda, double alpha);
/// Largest violation of the sparse-group-lasso optimality conditions.
double kkt_residual(const YwSystem& sys, std::span<const double> c, double lambda, double alpha);

/// Smallest lambda whose solution is exactly zero.
double lambda_max(const YwSystem& sys, double alpha);
/// Geometric grid from lmax down to ratio * lmax, descending.
std::vector<double> lambda_path(double lmax, std::size_t n_points, double ratio = 1e-4);

std::pair<Mat, Mat> reconstruct(std::span<const double> c, const GroupLayout& layout);
Vec flatten(const Mat& a, const Mat& b, const GroupLayout& layout);

/// Block coordinate descent over the groups. Gram matrices of the per-equation
/// blocks are formed once, so one solver serves a whole regularisation path.
/// Whenever the nonzero pattern survives a sweep unchanged, a Newton step on
/// that pattern is tried; the Hessian there is block diagonal by equation plus
/// one rank-one term per active group. Convergence is always certified by a
/// plain sweep. The referenced system must outlive the solver.
/// lambda = 0 is solved directly per equation; rank-deficient equations take
/// the minimum-norm least-squares solution.
class SglSolver {
 public:
  explicit SglSolver(const YwSystem& sys);

  SplashFit fit(double lambda, double alpha, const SolverOptions& opts = {},
                std::optional<std::span<const double>> warm_start = std::nullopt) const;

  /// Warm-started fits along a descending lambda sequence.
  std::vector<SplashFit> path(std::span<const double> lambdas, double alpha,
                              const SolverOptions& opts = {}) const;

  double lambda_max(double alpha) const;
  const YwSystem& system() const noexcept { return sys_; }

 private:
  struct EqBlock {  // the 1 or 2 members of a group that live in one equation
    std::size_t eq;
    std::size_t n;          // 1 or 2
    std::size_t local[2];   // column index within equation eq
    std::size_t pos[2];     // position in c
    std::size_t slot;       // offset of the first member inside the group vector
    double h[3];            // G entries: (0,0), (0,1), (1,1)
  };
  struct GroupPlan {
    std::vector<EqBlock> blocks;
    std::size_t size = 0;
    double weight = 0.0;
    double lipschitz = 0.0;  // 2 * lambda_max(G_gg)
  };

  void solve_unpenalized(Vec& c) const;
  void group_gradient_at_zero(const GroupPlan& g, std::span<const double> c,
                              const std::vector<Vec>& q, Vec& g0) const;
  void group_minimize(const GroupPlan& g, const Vec& g0, double l1, double l2, double tol,
                      Vec& x) const;
  double group_value(const GroupPlan& g, const Vec& g0, double l1, double l2,
                     const Vec& x) const;
  double smooth_loss(std::span<const double> c, const std::vector<Vec>& q) const;
  double full_objective(std::span<const double> c, const std::vector<Vec>& q, double lambda,
                        double alpha) const;
  /// Newton iterations on the current nonzero pattern. Steps stop at the
  /// first coordinate that would cross zero and are only taken when they
  /// lower the objective.
  void newton_polish(double lambda, double alpha, Vec& c, std::vector<Vec>& q) const;

  const YwSystem& sys_;
  std::vector<Mat> gram_;  // V_i' V_i
  std::vector<Vec> rhs_;   // V_i' sigma_i
  double target_sq_ = 0.0;
  std::vector<GroupPlan> plans_;
};

/// One-shot convenience wrapper around SglSolver.
SplashFit fit(const YwSystem& sys, double lambda, double alpha, const SolverOptions& opts = {},
              std::optional<std::span<const double>> warm_start = std::nullopt);

}  // namespace splash
