#include "splash/autocov.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace splash {

namespace {

void check_autocov_args(const Panel& p, std::size_t lag) {
  if (lag > 1) throw InvalidArgument("sample_autocov: lag must be 0 or 1");
  if (p.n_time() < lag + 2) throw InvalidArgument("sample_autocov: too few observations");
  require_finite(p.values, "sample_autocov");
}

// Row i of the lag-`lag` autocovariance; the summation order over t is fixed
// so the serial and parallel kernels agree exactly.
inline void autocov_row(const Mat& y, std::size_t lag, std::size_t i, double inv_t, Mat& out) {
  const std::size_t n = y.rows();
  const std::size_t t_end = y.cols();
  const std::size_t t_begin = lag == 0 ? 1 : lag;
  auto yi = y.row(i);
  const std::size_t j_begin = lag == 0 ? i : 0;
  for (std::size_t j = j_begin; j < n; ++j) {
    auto yj = y.row(j);
    double s = 0.0;
    for (std::size_t t = t_begin; t < t_end; ++t) s += yi[t] * yj[t - lag];
    out(i, j) = s * inv_t;
  }
}

void mirror_lower(Mat& s) {
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j) s(i, j) = s(j, i);
}

}  // namespace

namespace serial {

Mat sample_autocov(const Panel& p, std::size_t lag) {
  check_autocov_args(p, lag);
  const std::size_t n = p.n_units();
  const double inv_t = 1.0 / static_cast<double>(p.n_time());
  Mat out(n, n);
  for (std::size_t i = 0; i < n; ++i) autocov_row(p.values, lag, i, inv_t, out);
  if (lag == 0) mirror_lower(out);
  return out;
}

}  // namespace serial

Mat sample_autocov(const Panel& p, std::size_t lag) {
  check_autocov_args(p, lag);
  const std::size_t n = p.n_units();
  const double inv_t = 1.0 / static_cast<double>(p.n_time());
  Mat out(n, n);
  const auto rows = static_cast<std::ptrdiff_t>(n);
  // Rows shrink for lag 0 (upper triangle only), hence the dynamic schedule.
#pragma omp parallel for schedule(dynamic, 4) if (n * n * p.n_time() > 65536)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    autocov_row(p.values, lag, static_cast<std::size_t>(i), inv_t, out);
  }
  if (lag == 0) mirror_lower(out);
  return out;
}

AcovPair unbanded_autocov(const Panel& p) {
  return AcovPair{sample_autocov(p, 0), sample_autocov(p, 1), std::nullopt};
}

AcovPair banded_autocov(const Panel& p, std::size_t h) {
  return AcovPair{band(sample_autocov(p, 0), h), band(sample_autocov(p, 1), h), h};
}

namespace {

// Sum of squares of m restricted to each diagonal distance |i-j| = k.
void add_by_distance(const Mat& m, std::vector<double>& acc) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const std::size_t k = i > j ? i - j : j - i;
      acc[k] += m(i, j) * m(i, j);
    }
}

}  // namespace

std::size_t select_bandwidth(const Panel& p, std::span<const std::size_t> h_grid,
                             std::size_t n_boot, std::size_t block_len, RngSpec spec) {
  if (h_grid.empty()) throw InvalidArgument("select_bandwidth: empty h_grid");
  if (n_boot < 2) throw InvalidArgument("select_bandwidth: n_boot must be at least 2");
  const std::size_t t = p.n_time();
  if (block_len >= t) throw InvalidArgument("select_bandwidth: block_len must be < n_time");
  const std::size_t usable = t - block_len;
  const std::size_t lo = std::max<std::size_t>(3, (usable + 2) / 3);
  const std::size_t hi = usable - lo;
  if (usable < 6 || hi < lo) throw InvalidArgument("select_bandwidth: panel too short");
  const std::size_t n = p.n_units();

  struct Split {
    std::size_t cut;
    bool fit_on_first;
  };
  std::vector<Split> splits(n_boot);
  Rng rng(spec);
  for (auto& s : splits) {
    s.cut = lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
    s.fit_on_first = rng.bernoulli(0.5);
  }

  // Per replicate and distance k: in-band error and out-of-band mass.
  std::vector<std::vector<double>> inside(n_boot, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> outside(n_boot, std::vector<double>(n, 0.0));
  const auto reps = static_cast<std::ptrdiff_t>(n_boot);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t r = 0; r < reps; ++r) {
    const Split& s = splits[static_cast<std::size_t>(r)];
    const Panel first = p.slice(0, s.cut);
    const Panel second = p.slice(s.cut + block_len, t);
    const Panel& fit = s.fit_on_first ? first : second;
    const Panel& ref = s.fit_on_first ? second : first;
    for (std::size_t lag = 0; lag <= 1; ++lag) {
      const Mat sf = serial::sample_autocov(fit, lag);
      const Mat sr = serial::sample_autocov(ref, lag);
      add_by_distance(sf - sr, inside[static_cast<std::size_t>(r)]);
      add_by_distance(sr, outside[static_cast<std::size_t>(r)]);
    }
  }

  std::vector<double> in_sum(n, 0.0), out_sum(n, 0.0);
  for (std::size_t r = 0; r < n_boot; ++r)
    for (std::size_t k = 0; k < n; ++k) {
      in_sum[k] += inside[r][k];
      out_sum[k] += outside[r][k];
    }

  std::size_t best_h = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t h : h_grid) {
    double risk = 0.0;
    for (std::size_t k = 0; k < n; ++k) risk += k <= h ? in_sum[k] : out_sum[k];
    risk /= static_cast<double>(n_boot);
    if (risk < best || (risk == best && h < best_h)) {
      best = risk;
      best_h = h;
    }
  }
  return best_h;
}

}  // namespace splash
