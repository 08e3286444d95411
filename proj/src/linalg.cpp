#include "splash/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

namespace splash {

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (data_.size() != rows_ * cols_) {
    throw InvalidArgument("Mat: data length does not match rows*cols");
  }
}

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::diagonal(std::span<const double> d) {
  Mat m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Mat Mat::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw InvalidArgument("Mat::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Mat(r, c, std::move(data));
}

Vec Mat::column(std::size_t j) const {
  Vec out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

Mat transpose(const Mat& m) {
  Mat t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

namespace {

void require_same_shape(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument(std::string(op) + ": shape mismatch");
  }
}

void require_usable(const Mat& m, const char* op) {
  if (m.empty()) throw InvalidArgument(std::string(op) + ": empty matrix");
  require_finite(m, op);
}

}  // namespace

Mat operator+(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "operator+");
  Mat out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] += bd[k];
  return out;
}

Mat operator-(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "operator-");
  Mat out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] -= bd[k];
  return out;
}

Mat operator*(double s, const Mat& m) {
  Mat out = m;
  for (double& x : out.data()) x *= s;
  return out;
}

Mat hcat(const Mat& left, const Mat& right) {
  if (left.rows() != right.rows()) throw InvalidArgument("hcat: row mismatch");
  Mat out(left.rows(), left.cols() + right.cols());
  for (std::size_t i = 0; i < left.rows(); ++i) {
    auto dst = out.row(i);
    std::copy(left.row(i).begin(), left.row(i).end(), dst.begin());
    std::copy(right.row(i).begin(), right.row(i).end(), dst.begin() + left.cols());
  }
  return out;
}

Mat select_columns(const Mat& m, std::span<const std::size_t> cols) {
  Mat out(m.rows(), cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (cols[k] >= m.cols()) throw InvalidArgument("select_columns: index out of range");
  }
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t k = 0; k < cols.size(); ++k) out(i, k) = m(i, cols[k]);
  return out;
}

bool all_finite(std::span<const double> v) noexcept {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

bool all_finite(const Mat& m) noexcept { return all_finite(m.data()); }

void require_finite(const Mat& m, std::string_view what) {
  if (!all_finite(m)) {
    throw InvalidArgument(std::string(what) + ": non-finite entry");
  }
}

// --- products ---------------------------------------------------------------

namespace serial {

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw InvalidArgument("matmul: inner dimension mismatch");
  Mat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      auto bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

}  // namespace serial

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw InvalidArgument("matmul: inner dimension mismatch");
  Mat c(a.rows(), b.cols());
  const auto n_rows = static_cast<std::ptrdiff_t>(a.rows());
  const std::size_t inner = a.cols();
  const std::size_t n_cols = b.cols();
  // Small products are dominated by thread start-up.
#pragma omp parallel for schedule(static) if (a.rows() * inner * n_cols > 32768)
  for (std::ptrdiff_t ii = 0; ii < n_rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    auto ci = c.row(i);
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = a(i, k);
      auto bk = b.row(k);
      for (std::size_t j = 0; j < n_cols; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

Vec matvec(const Mat& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw InvalidArgument("matvec: dimension mismatch");
  Vec y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    auto ai = a.row(i);
    for (std::size_t j = 0; j < x.size(); ++j) s += ai[j] * x[j];
    y[i] = s;
  }
  return y;
}

Mat gram(const Mat& a) {
  const std::size_t p = a.cols();
  Mat g(p, p);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto ar = a.row(r);
    for (std::size_t i = 0; i < p; ++i) {
      const double x = ar[i];
      if (x == 0.0) continue;
      for (std::size_t j = i; j < p; ++j) g(i, j) += x * ar[j];
    }
  }
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
  return g;
}

// --- norms ------------------------------------------------------------------

double norm_one(const Mat& m) {
  require_usable(m, "norm_one");
  double best = 0.0;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) s += std::abs(m(i, j));
    best = std::max(best, s);
  }
  return best;
}

double norm_inf(const Mat& m) {
  require_usable(m, "norm_inf");
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (double x : m.row(i)) s += std::abs(x);
    best = std::max(best, s);
  }
  return best;
}

double norm_one_inf(const Mat& m) { return std::max(norm_one(m), norm_inf(m)); }

double norm_max(const Mat& m) {
  require_finite(m, "norm_max");
  double best = 0.0;
  for (double x : m.data()) best = std::max(best, std::abs(x));
  return best;
}

double norm_frobenius(const Mat& m) { return norm2(m.data()); }

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double spectral_norm(const Mat& m, double tol, std::size_t max_iter) {
  if (!(tol > 0.0)) throw InvalidArgument("spectral_norm: tol must be positive");
  require_usable(m, "spectral_norm");
  require_finite(m, "spectral_norm");
  const std::size_t n = m.cols();
  if (norm_max(m) == 0.0) return 0.0;

  Vec v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  Vec mv(m.rows());
  Vec w(n);
  auto apply_gram = [&](const Vec& x, Vec& out) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
      double s = 0.0;
      auto mi = m.row(i);
      for (std::size_t j = 0; j < n; ++j) s += mi[j] * x[j];
      mv[i] = s;
    }
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      auto mi = m.row(i);
      for (std::size_t j = 0; j < n; ++j) out[j] += mi[j] * mv[i];
    }
  };

  double theta = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    apply_gram(v, w);
    theta = std::inner_product(v.begin(), v.end(), w.begin(), 0.0);
    double res2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) res2 += (w[j] - theta * v[j]) * (w[j] - theta * v[j]);
    const double wn = norm2(w);
    if (wn == 0.0) {
      // Start vector lies in the null space of m'm; restart from the
      // heaviest column.
      std::size_t best = 0;
      double best_norm = -1.0;
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) s += m(i, j) * m(i, j);
        if (s > best_norm) best_norm = s, best = j;
      }
      std::fill(v.begin(), v.end(), 0.0);
      v[best] = 1.0;
      continue;
    }
    if (std::sqrt(res2) <= tol * std::max(1.0, theta)) return std::sqrt(std::max(theta, 0.0));
    for (std::size_t j = 0; j < n; ++j) v[j] = w[j] / wn;
  }
  // Nearly tied leading singular values stall the vector iteration; the
  // Jacobi eigenvalues of m'm settle the question directly.
  const SymmetricEigen eig = symmetric_eigen(gram(m));
  return std::sqrt(std::max(eig.values.back(), 0.0));
}

Mat band(const Mat& m, std::size_t h) {
  Mat out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const std::size_t lo = i > h ? i - h : 0;
    const std::size_t hi = std::min(m.cols(), i + h + 1);
    for (std::size_t j = lo; j < hi; ++j) out(i, j) = m(i, j);
  }
  return out;
}

// --- LU -----------------------------------------------------------------------

namespace {

struct Lu {
  Mat lu;
  std::vector<std::size_t> perm;  // row i of PA is row perm[i] of A
  bool singular = false;

  explicit Lu(const Mat& a) : lu(a), perm(a.rows()) {
    const std::size_t n = a.rows();
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t piv = k;
      double best = std::abs(lu(k, k));
      for (std::size_t i = k + 1; i < n; ++i) {
        if (std::abs(lu(i, k)) > best) best = std::abs(lu(i, k)), piv = i;
      }
      if (best == 0.0) {
        singular = true;
        return;
      }
      if (piv != k) {
        std::swap_ranges(lu.row(k).begin(), lu.row(k).end(), lu.row(piv).begin());
        std::swap(perm[k], perm[piv]);
      }
      const double d = lu(k, k);
      for (std::size_t i = k + 1; i < n; ++i) {
        const double f = lu(i, k) / d;
        lu(i, k) = f;
        if (f == 0.0) continue;
        for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
      }
    }
  }

  Vec solve(std::span<const double> b) const {
    const std::size_t n = lu.rows();
    Vec x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm[i]];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) x[i] -= lu(i, j) * x[j];
    for (std::size_t ii = n; ii-- > 0;) {
      for (std::size_t j = ii + 1; j < n; ++j) x[ii] -= lu(ii, j) * x[j];
      x[ii] /= lu(ii, ii);
    }
    return x;
  }

  Vec solve_transpose(std::span<const double> b) const {
    const std::size_t n = lu.rows();
    Vec w(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) w[i] -= lu(j, i) * w[j];
      w[i] /= lu(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;)
      for (std::size_t j = ii + 1; j < n; ++j) w[ii] -= lu(j, ii) * w[j];
    Vec x(n);
    for (std::size_t i = 0; i < n; ++i) x[perm[i]] = w[i];
    return x;
  }

  // Hager (1984) / Higham (1988) estimate of ||A^{-1}||_1.
  double inverse_norm_one_estimate() const {
    const std::size_t n = lu.rows();
    Vec x(n, 1.0 / static_cast<double>(n));
    double est = 0.0;
    std::size_t last_j = n;
    for (int it = 0; it < 5; ++it) {
      Vec y = solve(x);
      est = 0.0;
      for (double v : y) est += std::abs(v);
      Vec xi(n);
      for (std::size_t i = 0; i < n; ++i) xi[i] = y[i] >= 0.0 ? 1.0 : -1.0;
      Vec z = solve_transpose(xi);
      std::size_t j = 0;
      double zmax = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(z[i]) > zmax) zmax = std::abs(z[i]), j = i;
      }
      const double ztx = std::inner_product(z.begin(), z.end(), x.begin(), 0.0);
      if (zmax <= ztx || j == last_j) break;
      std::fill(x.begin(), x.end(), 0.0);
      x[j] = 1.0;
      last_j = j;
    }
    return est;
  }
};

void require_square(const Mat& a, const char* op) {
  if (a.rows() != a.cols()) throw InvalidArgument(std::string(op) + ": matrix not square");
  require_usable(a, op);
}

Lu checked_lu(const Mat& a, const char* op) {
  require_square(a, op);
  require_finite(a, op);
  Lu lu(a);
  if (lu.singular) {
    throw SingularMatrixError(std::string(op) + ": matrix is singular",
                              std::numeric_limits<double>::infinity());
  }
  const double cond = norm_one(a) * lu.inverse_norm_one_estimate();
  if (!(cond <= kMaxCondition)) {
    std::ostringstream os;
    os << op << ": matrix is ill-conditioned (condition estimate " << cond << ")";
    throw SingularMatrixError(os.str(), cond);
  }
  return lu;
}

Vec refined_solve(const Lu& lu, const Mat& a, std::span<const double> b) {
  Vec x = lu.solve(b);
  Vec r(b.begin(), b.end());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ai = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) r[i] -= ai[j] * x[j];
  }
  Vec dx = lu.solve(r);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
  return x;
}

}  // namespace

double condition_estimate(const Mat& a) {
  require_square(a, "condition_estimate");
  Lu lu(a);
  if (lu.singular) return std::numeric_limits<double>::infinity();
  return norm_one(a) * lu.inverse_norm_one_estimate();
}

Mat solve_linear(const Mat& a, const Mat& b) {
  if (b.rows() != a.rows()) throw InvalidArgument("solve_linear: rhs row mismatch");
  require_finite(b, "solve_linear");
  const Lu lu = checked_lu(a, "solve_linear");
  Mat x(a.cols(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    const Vec col = b.column(j);
    const Vec xj = refined_solve(lu, a, col);
    for (std::size_t i = 0; i < xj.size(); ++i) x(i, j) = xj[i];
  }
  return x;
}

Vec solve_linear(const Mat& a, std::span<const double> b) {
  if (b.size() != a.rows()) throw InvalidArgument("solve_linear: rhs length mismatch");
  if (!all_finite(b)) throw InvalidArgument("solve_linear: non-finite rhs");
  const Lu lu = checked_lu(a, "solve_linear");
  return refined_solve(lu, a, b);
}

// --- symmetric eigen ------------------------------------------------------------

SymmetricEigen symmetric_eigen(const Mat& s, double tol, std::size_t max_sweeps) {
  require_square(s, "symmetric_eigen");
  const std::size_t n = s.rows();
  Mat a = s;
  Mat v = Mat::identity(n);
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        total += a(i, j) * a(i, j);
        if (i != j) off += a(i, j) * a(i, j);
      }
    if (off <= tol * tol * std::max(total, 1e-300)) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a(x, x) < a(y, y); });
  SymmetricEigen out{Vec(n), Mat(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

Vec pseudo_solve_symmetric(const Mat& s, std::span<const double> b, double rel_tol) {
  if (b.size() != s.rows()) throw InvalidArgument("pseudo_solve_symmetric: length mismatch");
  const SymmetricEigen eig = symmetric_eigen(s);
  const std::size_t n = s.rows();
  double top = 0.0;
  for (double x : eig.values) top = std::max(top, std::abs(x));
  Vec x(n, 0.0);
  if (top == 0.0) return x;
  for (std::size_t k = 0; k < n; ++k) {
    const double ev = eig.values[k];
    if (std::abs(ev) <= rel_tol * top) continue;
    double proj = 0.0;
    for (std::size_t i = 0; i < n; ++i) proj += eig.vectors(i, k) * b[i];
    proj /= ev;
    for (std::size_t i = 0; i < n; ++i) x[i] += proj * eig.vectors(i, k);
  }
  return x;
}

}  // namespace splash
