#include "splash/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "splash/autocov.hpp"

namespace splash {

namespace {

auto entry_order(const CoefKey& k) {
  return std::tuple(k.i, static_cast<int>(k.matrix), k.j);
}

inline double soft(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace

SupportSet::SupportSet(std::size_t n, std::vector<CoefKey> entries) : n_(n) {
  for (const CoefKey& k : entries) {
    if (k.i >= n || k.j >= n) throw InvalidArgument("SupportSet: index out of range");
    if (k.matrix == CoefMatrix::A && k.i == k.j)
      throw InvalidArgument("SupportSet: diagonal of A is not admissible");
  }
  std::sort(entries.begin(), entries.end(),
            [](const CoefKey& x, const CoefKey& y) { return entry_order(x) < entry_order(y); });
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
  entries_ = std::move(entries);
}

SupportSet SupportSet::banded(std::size_t n, std::size_t k) {
  std::vector<CoefKey> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t d = i > j ? i - j : j - i;
      if (d > k) continue;
      if (i != j) e.push_back({CoefMatrix::A, i, j});
      e.push_back({CoefMatrix::B, i, j});
    }
  return SupportSet(n, std::move(e));
}

SupportSet SupportSet::from_model(const StModel& m) {
  const std::size_t n = m.n();
  std::vector<CoefKey> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && m.a(i, j) != 0.0) e.push_back({CoefMatrix::A, i, j});
      if (m.b(i, j) != 0.0) e.push_back({CoefMatrix::B, i, j});
    }
  return SupportSet(n, std::move(e));
}

std::vector<CoefKey> SupportSet::equation(std::size_t i) const {
  std::vector<CoefKey> out;
  for (const CoefKey& k : entries_)
    if (k.i == i) out.push_back(k);
  return out;
}

GmwyFit gmwy_fit(const Panel& p, const SupportSet& support) {
  if (p.n_units() == 0 || p.n_time() == 0) throw InvalidArgument("gmwy_fit: empty panel");
  return gmwy_fit(unbanded_autocov(p), support);
}

GmwyFit gmwy_fit(const AcovPair& acov, const SupportSet& support) {
  const std::size_t n = acov.sigma0.rows();
  if (n == 0) throw InvalidArgument("gmwy_fit: empty panel");
  if (support.n_units() != n)
    throw InvalidArgument("gmwy_fit: support dimension does not match panel");
  GmwyFit out{Mat(n, n), Mat(n, n), {}};
  std::vector<std::vector<CoefKey>> cols(n);
  for (std::size_t i = 0; i < n; ++i) {
    cols[i] = support.equation(i);
    if (cols[i].size() > n)
      throw InvalidArgument("gmwy_fit: equation " + std::to_string(i) + " has " +
                            std::to_string(cols[i].size()) + " supported columns, more than N");
  }
  std::vector<char> pinv(n, 0);
  const auto eqs = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1) if (n >= 32)
  for (std::ptrdiff_t ii = 0; ii < eqs; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    if (cols[i].empty()) continue;
    const Mat v = equation_block(acov, cols[i]);
    const Mat g = gram(v);
    const Vec rhs = matvec(transpose(v), acov.sigma1.row(i));
    Vec x;
    try {
      x = solve_linear(g, rhs);
    } catch (const SingularMatrixError&) {
      x = pseudo_solve_symmetric(g, rhs);
      pinv[i] = 1;
    }
    for (std::size_t k = 0; k < cols[i].size(); ++k) {
      const CoefKey& key = cols[i][k];
      (key.matrix == CoefMatrix::A ? out.a : out.b)(key.i, key.j) = x[k];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (pinv[i]) out.pseudo_inverse_equations.push_back(i);
  return out;
}

PvarProblem::PvarProblem(const Panel& p) : n_(p.n_units()) {
  if (n_ == 0 || p.n_time() < 2) throw InvalidArgument("PvarProblem: need N >= 1 and T >= 2");
  require_finite(p.values, "PvarProblem");
  const Mat& y = p.values;
  const std::size_t t_end = p.n_time();
  xtx_ = Mat(n_, n_);
  xty_ = Mat(n_, n_);
  for (std::size_t i = 0; i < n_; ++i) {
    auto yi = y.row(i);
    for (std::size_t j = 0; j < n_; ++j) {
      auto yj = y.row(j);
      double sxx = 0.0, sxy = 0.0;
      for (std::size_t t = 1; t < t_end; ++t) {
        sxx += yi[t - 1] * yj[t - 1];
        sxy += yi[t] * yj[t - 1];
      }
      xtx_(i, j) = sxx;
      xty_(i, j) = sxy;
    }
  }
}

double PvarProblem::lambda_max() const {
  double m = 0.0;
  for (double v : xty_.data()) m = std::max(m, std::abs(2.0 * v));
  return m;
}

double PvarProblem::row_objective(std::size_t i, std::span<const double> ci,
                                  double lambda) const {
  double quad = 0.0, lin = 0.0, l1 = 0.0;
  for (std::size_t j = 0; j < n_; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < n_; ++k) s += xtx_(j, k) * ci[k];
    quad += ci[j] * s;
    lin += xty_(i, j) * ci[j];
    l1 += std::abs(ci[j]);
  }
  return quad - 2.0 * lin + lambda * l1;
}

PvarFit PvarProblem::fit(double lambda, double tol, std::size_t max_iter,
                         const Mat* warm_start) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw InvalidArgument("pvar_fit: lambda must be finite and non-negative");
  if (!(tol > 0.0)) throw InvalidArgument("pvar_fit: tol must be positive");
  if (warm_start && (warm_start->rows() != n_ || warm_start->cols() != n_))
    throw InvalidArgument("pvar_fit: warm start has wrong shape");

  PvarFit out;
  out.lambda = lambda;
  out.c = warm_start ? *warm_start : Mat(n_, n_);
  std::vector<std::size_t> sweeps(n_, 0);
  std::vector<double> kkt(n_, 0.0);
  std::vector<char> failed(n_, 0);
  const auto rows = static_cast<std::ptrdiff_t>(n_);
#pragma omp parallel for schedule(dynamic, 1) if (n_ >= 32)
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    auto ci = out.c.row(i);
    // grad_j = 2 (G c - r)_j, kept in sync through q = G c
    Vec q = matvec(xtx_, ci);
    std::size_t s = 0;
    for (; s < max_iter; ++s) {
      double change = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        const double gjj = xtx_(j, j);
        double next = 0.0;
        if (gjj > 0.0) {
          const double partial = xty_(i, j) - (q[j] - gjj * ci[j]);
          next = soft(2.0 * partial, lambda) / (2.0 * gjj);
        }
        const double delta = next - ci[j];
        if (delta == 0.0) continue;
        ci[j] = next;
        change = std::max(change, std::abs(delta));
        auto gj = xtx_.row(j);
        for (std::size_t k = 0; k < n_; ++k) q[k] += delta * gj[k];
      }
      if (change <= tol) break;
    }
    if (s == max_iter) failed[i] = 1;
    sweeps[i] = s + 1;
    q = matvec(xtx_, ci);
    double worst = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      const double g = 2.0 * (q[j] - xty_(i, j));
      const double r = ci[j] != 0.0 ? std::abs(g + lambda * (ci[j] > 0 ? 1.0 : -1.0))
                                    : std::max(0.0, std::abs(g) - lambda);
      worst = std::max(worst, r);
    }
    kkt[i] = worst;
  }
  for (std::size_t i = 0; i < n_; ++i) {
    out.n_iter = std::max(out.n_iter, sweeps[i]);
    out.kkt_residual = std::max(out.kkt_residual, kkt[i]);
    if (failed[i]) {
      const auto d = out.c.data();
      throw ConvergenceError("pvar_fit: row " + std::to_string(i) + " did not converge after " +
                                 std::to_string(max_iter) + " sweeps",
                             Vec(d.begin(), d.end()), kkt[i], max_iter);
    }
  }
  return out;
}

PvarFit pvar_fit(const Panel& p, double lambda, double tol, std::size_t max_iter) {
  return PvarProblem(p).fit(lambda, tol, max_iter);
}

Vec const_forecast(const Panel& p) {
  if (p.n_time() == 0) throw InvalidArgument("const_forecast: empty window");
  Vec m(p.n_units(), 0.0);
  for (std::size_t i = 0; i < p.n_units(); ++i) {
    double s = 0.0;
    for (double v : p.values.row(i)) s += v;
    m[i] = s / static_cast<double>(p.n_time());
  }
  return m;
}

Mat transition_matrix(const Mat& a_hat, const Mat& b_hat) {
  const std::size_t n = a_hat.rows();
  if (a_hat.cols() != n || b_hat.rows() != n || b_hat.cols() != n)
    throw InvalidArgument("transition_matrix: A and B must be square and of equal size");
  return solve_linear(Mat::identity(n) - a_hat, b_hat);
}

Vec forecast_one_step(const Mat& a_hat, const Mat& b_hat, std::span<const double> y_last) {
  const std::size_t n = a_hat.rows();
  if (a_hat.cols() != n || b_hat.rows() != n || b_hat.cols() != n || y_last.size() != n)
    throw InvalidArgument("forecast_one_step: dimension mismatch");
  return solve_linear(Mat::identity(n) - a_hat, matvec(b_hat, y_last));
}

}  // namespace splash
