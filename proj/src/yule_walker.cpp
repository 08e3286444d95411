#include "splash/yule_walker.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace splash {

std::optional<std::size_t> GroupLayout::position(CoefMatrix m, std::size_t i,
                                                 std::size_t j) const {
  if (i >= n_units || j >= n_units) return std::nullopt;
  const auto& table = m == CoefMatrix::A ? index_a : index_b;
  const std::size_t p = table[i * n_units + j];
  if (p == kNoPosition) return std::nullopt;
  return p;
}

GroupLayout build_layout(std::size_t n, std::size_t cap, bool allow_full_cap) {
  if (n == 0) throw InvalidArgument("build_layout: n must be positive");
  const std::size_t upper = allow_full_cap ? n - 1 : n / 4;
  if (cap < 1 || cap > upper) {
    throw InvalidArgument("build_layout: cap " + std::to_string(cap) + " outside [1, " +
                          std::to_string(upper) + "]");
  }
  GroupLayout g;
  g.n_units = n;
  g.cap = cap;
  g.index_a.assign(n * n, kNoPosition);
  g.index_b.assign(n * n, kNoPosition);
  g.eq_offset.push_back(0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i > cap ? i - cap : 0;
    const std::size_t hi = std::min(n, i + cap + 1);
    for (std::size_t j = lo; j < hi; ++j) {
      if (j == i) continue;
      g.index_a[i * n + j] = g.coeffs.size();
      g.coeffs.push_back({CoefMatrix::A, i, j});
    }
    for (std::size_t j = lo; j < hi; ++j) {
      g.index_b[i * n + j] = g.coeffs.size();
      g.coeffs.push_back({CoefMatrix::B, i, j});
    }
    g.eq_offset.push_back(g.coeffs.size());
  }

  for (std::size_t k = 1; k <= cap; ++k) g.groups.push_back({CoefMatrix::A, k, {}, 0.0});
  for (std::size_t k = 0; k <= cap; ++k) g.groups.push_back({CoefMatrix::B, k, {}, 0.0});
  g.group_of.resize(g.coeffs.size());
  for (std::size_t pos = 0; pos < g.coeffs.size(); ++pos) {
    const CoefKey& key = g.coeffs[pos];
    const std::size_t dist = key.i > key.j ? key.i - key.j : key.j - key.i;
    const std::size_t gi = key.matrix == CoefMatrix::A ? dist - 1 : cap + dist;
    g.groups[gi].members.push_back(pos);
    g.group_of[pos] = gi;
  }
  for (auto& grp : g.groups) grp.weight = std::sqrt(static_cast<double>(grp.members.size()));
  return g;
}

Mat equation_block(const AcovPair& acov, std::span<const CoefKey> columns) {
  const std::size_t n = acov.sigma0.rows();
  Mat v(n, columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const CoefKey& key = columns[c];
    if (key.j >= n) throw InvalidArgument("equation_block: column index out of range");
    for (std::size_t l = 0; l < n; ++l) {
      // column j of Sigma_1' is row j of Sigma_1
      v(l, c) = key.matrix == CoefMatrix::A ? acov.sigma1(key.j, l) : acov.sigma0(l, key.j);
    }
  }
  return v;
}

YwSystem assemble_system(const AcovPair& acov, const GroupLayout& layout) {
  const std::size_t n = layout.n_units;
  if (acov.sigma0.rows() != n || acov.sigma0.cols() != n || acov.sigma1.rows() != n ||
      acov.sigma1.cols() != n) {
    throw InvalidArgument("assemble_system: autocovariance dimension does not match layout");
  }
  YwSystem sys;
  sys.layout = layout;
  sys.target.resize(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < n; ++l) sys.target[i * n + l] = acov.sigma1(i, l);
  sys.blocks.resize(n);
  const auto eqs = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (n >= 64)
  for (std::ptrdiff_t i = 0; i < eqs; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    sys.blocks[ii] = equation_block(acov, layout.equation_columns(ii));
  }
  return sys;
}

Mat block_diagonal_design(const YwSystem& sys) {
  const std::size_t n = sys.layout.n_units;
  Mat v(n * n, sys.layout.size());
  for (std::size_t i = 0; i < n; ++i) {
    const Mat& blk = sys.blocks[i];
    const std::size_t off = sys.layout.eq_offset[i];
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < blk.cols(); ++c) v(i * n + r, off + c) = blk(r, c);
  }
  return v;
}

}  // namespace splash
