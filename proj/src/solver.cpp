#include "splash/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace splash {

namespace {

void check_tuning(double lambda, double alpha) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw InvalidArgument("solver: lambda must be finite and non-negative");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("solver: alpha must lie in [0, 1]");
}

inline double soft(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

double soft_norm(std::span<const double> v, double t) {
  double s = 0.0;
  for (double x : v) {
    const double y = soft(x, t);
    s += y * y;
  }
  return std::sqrt(s);
}

// Gradient 2 V_i'(V_i c_i - sigma_i) for every equation, concatenated.
Vec full_gradient(const YwSystem& sys, std::span<const double> c) {
  const GroupLayout& lay = sys.layout;
  const std::size_t n = lay.n_units;
  Vec grad(lay.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Mat& v = sys.blocks[i];
    const std::size_t off = lay.eq_offset[i];
    auto sigma = sys.target_segment(i);
    Vec r(n);
    for (std::size_t l = 0; l < n; ++l) {
      double s = -sigma[l];
      for (std::size_t k = 0; k < v.cols(); ++k) s += v(l, k) * c[off + k];
      r[l] = s;
    }
    for (std::size_t k = 0; k < v.cols(); ++k) {
      double s = 0.0;
      for (std::size_t l = 0; l < n; ++l) s += v(l, k) * r[l];
      grad[off + k] = 2.0 * s;
    }
  }
  return grad;
}

// Smallest lambda with ||soft(v, alpha*lambda)|| <= (1-alpha)*lambda*w.
double group_lambda_max(std::span<const double> v, double alpha, double w) {
  double vmax = 0.0;
  for (double x : v) vmax = std::max(vmax, std::abs(x));
  if (vmax == 0.0) return 0.0;
  if (alpha == 0.0) return norm2(v) / w;
  if (alpha == 1.0) return vmax;
  double lo = 0.0;
  double hi = vmax / alpha;  // soft() vanishes here
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (soft_norm(v, alpha * mid) <= (1.0 - alpha) * mid * w)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double lambda_max_from_gradient(const GroupLayout& lay, const Vec& grad0, double alpha) {
  double best = 0.0;
  Vec v;
  for (const Group& g : lay.groups) {
    v.clear();
    for (std::size_t p : g.members) v.push_back(grad0[p]);
    best = std::max(best, group_lambda_max(v, alpha, g.weight));
  }
  return best;
}

// In-place Cholesky (lower factor) of a small SPD matrix, row-major.
bool cholesky(std::vector<double>& a, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    a[j * n + j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / d;
    }
  }
  return true;
}

void cholesky_solve(const std::vector<double>& l, std::size_t n, double* x) {
  for (std::size_t i = 0; i < n; ++i) {
    double s = x[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * x[k];
    x[i] = s / l[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= l[k * n + i] * x[k];
    x[i] = s / l[i * n + i];
  }
}

std::vector<signed char> sign_pattern(const Vec& c) {
  std::vector<signed char> s(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) s[k] = c[k] > 0 ? 1 : (c[k] < 0 ? -1 : 0);
  return s;
}

}  // namespace

double penalty(std::span<const double> c, double alpha, const GroupLayout& layout) {
  if (c.size() != layout.size()) throw InvalidArgument("penalty: coefficient length mismatch");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("penalty: alpha must lie in [0, 1]");
  double group_part = 0.0;
  double l1 = 0.0;
  for (const Group& g : layout.groups) {
    double s = 0.0;
    for (std::size_t p : g.members) {
      s += c[p] * c[p];
      l1 += std::abs(c[p]);
    }
    group_part += g.weight * std::sqrt(s);
  }
  return (1.0 - alpha) * group_part + alpha * l1;
}

double loss(const YwSystem& sys, std::span<const double> c) {
  const GroupLayout& lay = sys.layout;
  if (c.size() != lay.size()) throw InvalidArgument("loss: coefficient length mismatch");
  const std::size_t n = lay.n_units;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Mat& v = sys.blocks[i];
    const std::size_t off = lay.eq_offset[i];
    auto sigma = sys.target_segment(i);
    for (std::size_t l = 0; l < n; ++l) {
      double r = sigma[l];
      for (std::size_t k = 0; k < v.cols(); ++k) r -= v(l, k) * c[off + k];
      total += r * r;
    }
  }
  return total;
}

double objective(const YwSystem& sys, std::span<const double> c, double lambda, double alpha) {
  return loss(sys, c) + lambda * penalty(c, alpha, sys.layout);
}

double kkt_residual(const YwSystem& sys, std::span<const double> c, double lambda,
                    double alpha) {
  check_tuning(lambda, alpha);
  const GroupLayout& lay = sys.layout;
  if (c.size() != lay.size()) throw InvalidArgument("kkt_residual: coefficient length mismatch");
  const Vec grad = full_gradient(sys, c);
  const double l1 = lambda * alpha;
  double worst = 0.0;
  Vec v;
  for (const Group& g : lay.groups) {
    const double l2 = lambda * (1.0 - alpha) * g.weight;
    double norm = 0.0;
    for (std::size_t p : g.members) norm += c[p] * c[p];
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      v.clear();
      for (std::size_t p : g.members) v.push_back(grad[p]);
      worst = std::max(worst, std::max(0.0, soft_norm(v, l1) - l2));
      continue;
    }
    for (std::size_t p : g.members) {
      double r;
      if (c[p] != 0.0) {
        r = std::abs(grad[p] + l2 * c[p] / norm + l1 * (c[p] > 0 ? 1.0 : -1.0));
      } else {
        r = std::max(0.0, std::abs(grad[p]) - l1);
      }
      worst = std::max(worst, r);
    }
  }
  return worst;
}

double lambda_max(const YwSystem& sys, double alpha) {
  check_tuning(0.0, alpha);
  const Vec zero(sys.layout.size(), 0.0);
  return lambda_max_from_gradient(sys.layout, full_gradient(sys, zero), alpha);
}

std::vector<double> lambda_path(double lmax, std::size_t n_points, double ratio) {
  if (n_points == 0) throw InvalidArgument("lambda_path: n_points must be positive");
  if (!(lmax >= 0.0) || !std::isfinite(lmax))
    throw InvalidArgument("lambda_path: lambda_max must be finite and non-negative");
  if (!(ratio > 0.0 && ratio <= 1.0)) throw InvalidArgument("lambda_path: ratio must lie in (0, 1]");
  std::vector<double> out(n_points);
  if (n_points == 1) {
    out[0] = lmax;
    return out;
  }
  const double step = std::log(ratio) / static_cast<double>(n_points - 1);
  for (std::size_t k = 0; k < n_points; ++k)
    out[k] = lmax * std::exp(step * static_cast<double>(k));
  out.back() = lmax * ratio;
  return out;
}

std::pair<Mat, Mat> reconstruct(std::span<const double> c, const GroupLayout& layout) {
  if (c.size() != layout.size()) throw InvalidArgument("reconstruct: coefficient length mismatch");
  const std::size_t n = layout.n_units;
  Mat a(n, n), b(n, n);
  for (std::size_t p = 0; p < c.size(); ++p) {
    const CoefKey& k = layout.coeffs[p];
    (k.matrix == CoefMatrix::A ? a : b)(k.i, k.j) = c[p];
  }
  return {std::move(a), std::move(b)};
}

Vec flatten(const Mat& a, const Mat& b, const GroupLayout& layout) {
  const std::size_t n = layout.n_units;
  if (a.rows() != n || a.cols() != n || b.rows() != n || b.cols() != n)
    throw InvalidArgument("flatten: matrix dimension does not match layout");
  Vec c(layout.size());
  for (std::size_t p = 0; p < c.size(); ++p) {
    const CoefKey& k = layout.coeffs[p];
    c[p] = (k.matrix == CoefMatrix::A ? a : b)(k.i, k.j);
  }
  return c;
}

// --- SglSolver --------------------------------------------------------------

SglSolver::SglSolver(const YwSystem& sys) : sys_(sys) {
  const GroupLayout& lay = sys.layout;
  const std::size_t n = lay.n_units;
  if (sys.blocks.size() != n || sys.target.size() != n * n)
    throw InvalidArgument("SglSolver: malformed system");
  gram_.resize(n);
  rhs_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Mat& v = sys.blocks[i];
    if (v.rows() != n || v.cols() != lay.equation_size(i))
      throw InvalidArgument("SglSolver: block shape does not match layout");
    gram_[i] = gram(v);
    auto sigma = sys.target_segment(i);
    rhs_[i].assign(v.cols(), 0.0);
    for (std::size_t k = 0; k < v.cols(); ++k)
      for (std::size_t l = 0; l < n; ++l) rhs_[i][k] += v(l, k) * sigma[l];
    for (double s : sigma) target_sq_ += s * s;
  }

  plans_.resize(lay.groups.size());
  for (std::size_t gi = 0; gi < lay.groups.size(); ++gi) {
    const Group& g = lay.groups[gi];
    GroupPlan& plan = plans_[gi];
    plan.size = g.members.size();
    plan.weight = g.weight;
    std::size_t slot = 0;
    for (std::size_t p : g.members) {
      const CoefKey& key = lay.coeffs[p];
      const std::size_t local = p - lay.eq_offset[key.i];
      if (!plan.blocks.empty() && plan.blocks.back().eq == key.i) {
        EqBlock& b = plan.blocks.back();
        b.local[1] = local;
        b.pos[1] = p;
        b.n = 2;
      } else {
        plan.blocks.push_back({key.i, 1, {local, 0}, {p, 0}, slot, {0.0, 0.0, 0.0}});
      }
      ++slot;
    }
    double lmax = 0.0;
    for (EqBlock& b : plan.blocks) {
      const Mat& gm = gram_[b.eq];
      b.h[0] = gm(b.local[0], b.local[0]);
      if (b.n == 2) {
        b.h[1] = gm(b.local[0], b.local[1]);
        b.h[2] = gm(b.local[1], b.local[1]);
        const double mean = 0.5 * (b.h[0] + b.h[2]);
        const double half = 0.5 * (b.h[0] - b.h[2]);
        lmax = std::max(lmax, mean + std::sqrt(half * half + b.h[1] * b.h[1]));
      } else {
        lmax = std::max(lmax, b.h[0]);
      }
    }
    plan.lipschitz = 2.0 * lmax;
  }
}

double SglSolver::lambda_max(double alpha) const {
  check_tuning(0.0, alpha);
  const GroupLayout& lay = sys_.layout;
  Vec grad0(lay.size());
  for (std::size_t i = 0; i < lay.n_units; ++i)
    for (std::size_t k = 0; k < rhs_[i].size(); ++k) grad0[lay.eq_offset[i] + k] = -2.0 * rhs_[i][k];
  return lambda_max_from_gradient(lay, grad0, alpha);
}

void SglSolver::solve_unpenalized(Vec& c) const {
  // Per-equation least squares; rank-deficient equations take the
  // minimum-norm solution, as GMWY does.
  const GroupLayout& lay = sys_.layout;
  for (std::size_t i = 0; i < lay.n_units; ++i) {
    Vec x;
    try {
      x = solve_linear(gram_[i], rhs_[i]);
    } catch (const SingularMatrixError&) {
      x = pseudo_solve_symmetric(gram_[i], rhs_[i]);
    }
    std::copy(x.begin(), x.end(), c.begin() + static_cast<std::ptrdiff_t>(lay.eq_offset[i]));
  }
}

double SglSolver::smooth_loss(std::span<const double> c, const std::vector<Vec>& q) const {
  // c'Gc - 2 b'c + sigma'sigma, with q = G c maintained by the caller.
  const GroupLayout& lay = sys_.layout;
  double s = target_sq_;
  for (std::size_t i = 0; i < lay.n_units; ++i) {
    const std::size_t off = lay.eq_offset[i];
    for (std::size_t k = 0; k < rhs_[i].size(); ++k)
      s += c[off + k] * (q[i][k] - 2.0 * rhs_[i][k]);
  }
  return std::max(s, 0.0);
}

void SglSolver::group_gradient_at_zero(const GroupPlan& g, std::span<const double> c,
                                       const std::vector<Vec>& q, Vec& g0) const {
  g0.assign(g.size, 0.0);
  for (const EqBlock& b : g.blocks) {
    const Mat& gm = gram_[b.eq];
    for (std::size_t m = 0; m < b.n; ++m) {
      double own = 0.0;  // contribution of the group's own members in this equation
      for (std::size_t m2 = 0; m2 < b.n; ++m2) own += gm(b.local[m], b.local[m2]) * c[b.pos[m2]];
      g0[b.slot + m] = 2.0 * (q[b.eq][b.local[m]] - own - rhs_[b.eq][b.local[m]]);
    }
  }
}

double SglSolver::group_value(const GroupPlan& g, const Vec& g0, double l1, double l2,
                              const Vec& x) const {
  double quad = 0.0;
  for (const EqBlock& b : g.blocks) {
    const double x0 = x[b.slot];
    if (b.n == 2) {
      const double x1 = x[b.slot + 1];
      quad += b.h[0] * x0 * x0 + 2.0 * b.h[1] * x0 * x1 + b.h[2] * x1 * x1;
    } else {
      quad += b.h[0] * x0 * x0;
    }
  }
  double lin = 0.0, a1 = 0.0, sq = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    lin += g0[k] * x[k];
    a1 += std::abs(x[k]);
    sq += x[k] * x[k];
  }
  return quad + lin + l1 * a1 + l2 * std::sqrt(sq);
}

// FISTA with function-value restart on
//   x'Hx + g0'x + l1 ||x||_1 + l2 ||x||_2,
// H being the (block-diagonal) restriction of the Gram matrix to the group.
void SglSolver::group_minimize(const GroupPlan& g, const Vec& g0, double l1, double l2,
                               double tol, Vec& x) const {
  const double lip = g.lipschitz;
  if (!(lip > 0.0)) {  // no curvature: all columns vanish, zero is optimal
    std::fill(x.begin(), x.end(), 0.0);
    return;
  }
  const std::size_t sz = g.size;
  Vec y = x, z(sz), xn(sz);
  double fx = group_value(g, g0, l1, l2, x);
  double t = 1.0;
  constexpr std::size_t kMaxInner = 20'000;
  for (std::size_t it = 0; it < kMaxInner; ++it) {
    for (const EqBlock& b : g.blocks) {
      const double y0 = y[b.slot];
      if (b.n == 2) {
        const double y1 = y[b.slot + 1];
        z[b.slot] = y0 - (2.0 * (b.h[0] * y0 + b.h[1] * y1) + g0[b.slot]) / lip;
        z[b.slot + 1] = y1 - (2.0 * (b.h[1] * y0 + b.h[2] * y1) + g0[b.slot + 1]) / lip;
      } else {
        z[b.slot] = y0 - (2.0 * b.h[0] * y0 + g0[b.slot]) / lip;
      }
    }
    double nrm = 0.0;
    for (std::size_t k = 0; k < sz; ++k) {
      xn[k] = soft(z[k], l1 / lip);
      nrm += xn[k] * xn[k];
    }
    nrm = std::sqrt(nrm);
    const double shrink = nrm > 0.0 ? std::max(0.0, 1.0 - (l2 / lip) / nrm) : 0.0;
    for (double& v : xn) v *= shrink;

    const double fn = group_value(g, g0, l1, l2, xn);
    if (fn > fx) {
      if (t == 1.0) return;  // a plain prox step from x cannot improve: x is optimal to rounding
      y = x;
      t = 1.0;
      continue;
    }
    double change = 0.0;
    for (std::size_t k = 0; k < sz; ++k) change = std::max(change, std::abs(xn[k] - x[k]));
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t k = 0; k < sz; ++k) y[k] = xn[k] + ((t - 1.0) / tn) * (xn[k] - x[k]);
    x.swap(xn);
    fx = fn;
    t = tn;
    if (change <= tol) return;
  }
}

double SglSolver::full_objective(std::span<const double> c, const std::vector<Vec>& q,
                                 double lambda, double alpha) const {
  return smooth_loss(c, q) + lambda * penalty(c, alpha, sys_.layout);
}

void SglSolver::newton_polish(double lambda, double alpha, Vec& c, std::vector<Vec>& q) const {
  const GroupLayout& lay = sys_.layout;
  const std::size_t n = lay.n_units;
  const std::size_t n_groups = lay.groups.size();
  const double l1 = lambda * alpha;
  const double lg = lambda * (1.0 - alpha);
  constexpr int kMaxNewton = 50;

  for (int it = 0; it < kMaxNewton; ++it) {
    // Support, ordered equation by equation.
    std::vector<std::size_t> sup;
    std::vector<std::size_t> eq_begin(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      eq_begin[i] = sup.size();
      for (std::size_t p = lay.eq_offset[i]; p < lay.eq_offset[i + 1]; ++p)
        if (c[p] != 0.0) sup.push_back(p);
    }
    eq_begin[n] = sup.size();
    const std::size_t m = sup.size();
    if (m == 0) return;

    Vec gnorm(n_groups, 0.0);
    for (std::size_t p : sup) gnorm[lay.group_of[p]] += c[p] * c[p];
    for (double& v : gnorm) v = std::sqrt(v);
    Vec beta(n_groups, 0.0);
    if (lg > 0.0)
      for (std::size_t g = 0; g < n_groups; ++g)
        if (gnorm[g] > 0.0) beta[g] = lg * lay.groups[g].weight / gnorm[g];

    Vec grad(m);
    for (std::size_t s = 0; s < m; ++s) {
      const std::size_t p = sup[s];
      const std::size_t i = lay.coeffs[p].i;
      const std::size_t k = p - lay.eq_offset[i];
      grad[s] = 2.0 * (q[i][k] - rhs_[i][k]) + l1 * (c[p] > 0 ? 1.0 : -1.0) +
                beta[lay.group_of[p]] * c[p];
    }

    // D = blockdiag(2 G_S) + diag(beta); the Hessian is D - sum_g beta_g u_g u_g'.
    std::vector<std::vector<double>> chol(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t b0 = eq_begin[i], mi = eq_begin[i + 1] - b0;
      if (mi == 0) continue;
      auto& a = chol[i];
      a.assign(mi * mi, 0.0);
      const Mat& gm = gram_[i];
      for (std::size_t r = 0; r < mi; ++r) {
        const std::size_t kr = sup[b0 + r] - lay.eq_offset[i];
        for (std::size_t s = 0; s < mi; ++s) {
          const std::size_t ks = sup[b0 + s] - lay.eq_offset[i];
          a[r * mi + s] = 2.0 * gm(kr, ks);
        }
        a[r * mi + r] += beta[lay.group_of[sup[b0 + r]]];
      }
      if (!cholesky(a, mi)) return;
    }
    auto apply_dinv = [&](Vec& x) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t b0 = eq_begin[i], mi = eq_begin[i + 1] - b0;
        if (mi) cholesky_solve(chol[i], mi, x.data() + b0);
      }
    };

    Vec d(m);
    for (std::size_t s = 0; s < m; ++s) d[s] = -grad[s];
    apply_dinv(d);

    // Woodbury correction for the rank-one group terms.
    std::vector<std::size_t> active;
    for (std::size_t g = 0; g < n_groups; ++g)
      if (beta[g] > 0.0) active.push_back(g);
    if (!active.empty()) {
      const std::size_t ka = active.size();
      std::vector<Vec> u(ka, Vec(m, 0.0)), w;
      std::vector<std::size_t> slot_of(n_groups, 0);
      for (std::size_t a = 0; a < ka; ++a) slot_of[active[a]] = a;
      for (std::size_t s = 0; s < m; ++s) {
        const std::size_t g = lay.group_of[sup[s]];
        if (beta[g] > 0.0) u[slot_of[g]][s] = c[sup[s]] / gnorm[g];
      }
      w = u;
      for (Vec& col : w) apply_dinv(col);
      Mat small(ka, ka);
      Vec rhs(ka, 0.0);
      for (std::size_t a = 0; a < ka; ++a) {
        for (std::size_t b = 0; b < ka; ++b) {
          double s = 0.0;
          for (std::size_t r = 0; r < m; ++r) s += u[a][r] * w[b][r];
          small(a, b) = -s;
        }
        small(a, a) += 1.0 / beta[active[a]];
        for (std::size_t r = 0; r < m; ++r) rhs[a] += u[a][r] * d[r];
      }
      Vec y;
      try {
        y = solve_linear(small, rhs);
      } catch (const SingularMatrixError&) {
        return;
      }
      for (std::size_t a = 0; a < ka; ++a)
        for (std::size_t r = 0; r < m; ++r) d[r] += w[a][r] * y[a];
    }

    // Stop at the first kink of the l1 term.
    double t_cross = std::numeric_limits<double>::infinity();
    std::size_t s_cross = m;
    if (l1 > 0.0) {
      for (std::size_t s = 0; s < m; ++s) {
        const double cp = c[sup[s]];
        if (d[s] * cp < 0.0 && -cp / d[s] < t_cross) {
          t_cross = -cp / d[s];
          s_cross = s;
        }
      }
    }

    const double f0 = full_objective(c, q, lambda, alpha);
    double t = std::min(1.0, t_cross);
    bool clip = t_cross <= 1.0;
    Vec x;
    std::vector<Vec> qx;
    bool accepted = false;
    for (int bt = 0; bt < 40 && !accepted; ++bt) {
      x = c;
      for (std::size_t s = 0; s < m; ++s) x[sup[s]] = c[sup[s]] + t * d[s];
      if (clip) x[sup[s_cross]] = 0.0;
      qx = q;
      for (std::size_t i = 0; i < n; ++i)
        if (eq_begin[i + 1] > eq_begin[i])
          qx[i] = matvec(gram_[i], std::span<const double>(x).subspan(lay.eq_offset[i],
                                                                     lay.equation_size(i)));
      accepted = full_objective(x, qx, lambda, alpha) < f0;
      t *= 0.5;
      clip = false;
    }
    if (!accepted) return;
    double step = 0.0, scale = 1.0;
    for (std::size_t s = 0; s < m; ++s) {
      step = std::max(step, std::abs(x[sup[s]] - c[sup[s]]));
      scale = std::max(scale, std::abs(x[sup[s]]));
    }
    c.swap(x);
    q.swap(qx);
    if (step <= 1e-15 * scale) return;
  }
}

SplashFit SglSolver::fit(double lambda, double alpha, const SolverOptions& opts,
                         std::optional<std::span<const double>> warm_start) const {
  check_tuning(lambda, alpha);
  if (!(opts.tol > 0.0)) throw InvalidArgument("SglSolver::fit: tol must be positive");
  const GroupLayout& lay = sys_.layout;
  const std::size_t n = lay.n_units;

  Vec c(lay.size(), 0.0);
  if (warm_start) {
    if (warm_start->size() != c.size())
      throw InvalidArgument("SglSolver::fit: warm start length mismatch");
    if (!all_finite(*warm_start)) throw InvalidArgument("SglSolver::fit: warm start not finite");
    std::copy(warm_start->begin(), warm_start->end(), c.begin());
  }

  SplashFit out;
  out.lambda = lambda;
  out.alpha = alpha;

  bool done = false;
  if (lambda == 0.0) {
    solve_unpenalized(c);
    done = true;
    out.n_iter = 1;
  }

  std::vector<Vec> q(n);
  auto refresh_q = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t off = lay.eq_offset[i];
      q[i] = matvec(gram_[i], std::span<const double>(c).subspan(off, lay.equation_size(i)));
    }
  };
  refresh_q();
  auto current_objective = [&] { return smooth_loss(c, q) + lambda * penalty(c, alpha, lay); };

  const double l1 = lambda * alpha;
  Vec g0, x, old;
  std::vector<signed char> prev_pattern;
  std::size_t sweep = 0;
  double last_change = 0.0;
  while (!done) {
    if (sweep == opts.max_iter) {
      throw ConvergenceError("SglSolver::fit: no convergence after " +
                                 std::to_string(opts.max_iter) + " sweeps",
                             c, last_change, sweep);
    }
    ++sweep;
    double max_change = 0.0;
    for (const GroupPlan& g : plans_) {
      const double l2 = lambda * (1.0 - alpha) * g.weight;
      group_gradient_at_zero(g, c, q, g0);
      old.assign(g.size, 0.0);
      for (const EqBlock& b : g.blocks)
        for (std::size_t m = 0; m < b.n; ++m) old[b.slot + m] = c[b.pos[m]];

      x.assign(g.size, 0.0);
      if (soft_norm(g0, l1) > l2) {
        x = old;
        group_minimize(g, g0, l1, l2, 0.01 * opts.tol, x);
        if (group_value(g, g0, l1, l2, x) > group_value(g, g0, l1, l2, old)) x = old;
      }

      for (const EqBlock& b : g.blocks) {
        const Mat& gm = gram_[b.eq];
        for (std::size_t m = 0; m < b.n; ++m) {
          const double delta = x[b.slot + m] - old[b.slot + m];
          if (delta == 0.0) continue;
          max_change = std::max(max_change, std::abs(delta));
          c[b.pos[m]] = x[b.slot + m];
          auto grow = gm.row(b.local[m]);
          Vec& qi = q[b.eq];
          for (std::size_t k = 0; k < qi.size(); ++k) qi[k] += delta * grow[k];
        }
      }
    }
    last_change = max_change;
    if (opts.track_objective) out.objective_trace.push_back(current_objective());
    if (max_change <= opts.tol) break;
    if (sweep % 50 == 0) refresh_q();  // contain drift from incremental updates
    std::vector<signed char> pattern = sign_pattern(c);
    if (pattern == prev_pattern) {
      newton_polish(lambda, alpha, c, q);
      pattern = sign_pattern(c);
    }
    prev_pattern = std::move(pattern);
  }

  out.n_iter = std::max<std::size_t>(out.n_iter, sweep);
  out.c_hat = std::move(c);
  out.objective = objective(sys_, out.c_hat, lambda, alpha);
  out.kkt_residual = kkt_residual(sys_, out.c_hat, lambda, alpha);
  auto [a, b] = reconstruct(out.c_hat, lay);
  out.a_hat = std::move(a);
  out.b_hat = std::move(b);
  return out;
}

std::vector<SplashFit> SglSolver::path(std::span<const double> lambdas, double alpha,
                                       const SolverOptions& opts) const {
  std::vector<SplashFit> fits;
  fits.reserve(lambdas.size());
  for (double lam : lambdas) {
    if (fits.empty())
      fits.push_back(fit(lam, alpha, opts));
    else
      fits.push_back(fit(lam, alpha, opts, std::span<const double>(fits.back().c_hat)));
  }
  return fits;
}

SplashFit fit(const YwSystem& sys, double lambda, double alpha, const SolverOptions& opts,
              std::optional<std::span<const double>> warm_start) {
  return SglSolver(sys).fit(lambda, alpha, opts, warm_start);
}

}  // namespace splash
