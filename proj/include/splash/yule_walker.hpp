#pragma once

// Stacked generalized Yule-Walker system. Equation i of Sigma_1 = A Sigma_1 +
// B Sigma_0, read row-wise, is sigma_i = V_i c_i where sigma_i is row i of
// Sigma_1 and V_i holds the columns of [Sigma_1' Sigma_0] that belong to the
// admissible coefficients of row i of [A B].
//
// Coefficient ordering (fixed, relied on by golden files): equation-major;
// within equation i the A-columns by ascending j, then the B-columns by
// ascending j.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "splash/autocov.hpp"
#include "splash/linalg.hpp"

namespace splash {

enum class CoefMatrix : std::uint8_t { A, B };

struct CoefKey {
  CoefMatrix matrix;
  std::size_t i;
  std::size_t j;
  bool operator==(const CoefKey&) const = default;
};

/// One diagonal group: D_A(k) = {a_ij : |i-j| = k} or D_B(k).
struct Group {
  CoefMatrix matrix;
  std::size_t diagonal;
  std::vector<std::size_t> members;  // ascending positions in c
  double weight;                     // sqrt(|g|)
};

struct GroupLayout {
  std::size_t n_units = 0;
  std::size_t cap = 0;
  std::vector<CoefKey> coeffs;          // position -> (matrix, i, j)
  std::vector<std::size_t> eq_offset;   // equation i spans [eq_offset[i], eq_offset[i+1])
  std::vector<Group> groups;            // A diagonals 1..cap, then B diagonals 0..cap
  std::vector<std::size_t> group_of;    // position -> index into groups

  std::size_t size() const noexcept { return coeffs.size(); }
  std::size_t equation_size(std::size_t i) const { return eq_offset[i + 1] - eq_offset[i]; }
  std::span<const CoefKey> equation_columns(std::size_t i) const {
    return std::span(coeffs).subspan(eq_offset[i], equation_size(i));
  }
  std::optional<std::size_t> position(CoefMatrix m, std::size_t i, std::size_t j) const;

  // Dense lookup tables behind position(); npos marks inadmissible entries.
  std::vector<std::size_t> index_a;
  std::vector<std::size_t> index_b;
};

inline constexpr std::size_t kNoPosition = static_cast<std::size_t>(-1);

/// Requires 1 <= cap <= floor(n/4). With allow_full_cap the upper bound is
/// relaxed to n-1; that mode exists for population-exactness checks only.
GroupLayout build_layout(std::size_t n, std::size_t cap, bool allow_full_cap = false);

inline std::size_t default_cap(std::size_t n) { return n / 4; }

struct YwSystem {
  Vec target;               // stacked sigma_i, length N*N
  std::vector<Mat> blocks;  // V_i, N x |equation i|
  GroupLayout layout;

  std::span<const double> target_segment(std::size_t i) const {
    const std::size_t n = layout.n_units;
    return std::span(target).subspan(i * n, n);
  }
};

/// Columns of [Sigma_1' Sigma_0] for the given (matrix, j) pairs.
Mat equation_block(const AcovPair& acov, std::span<const CoefKey> columns);

YwSystem assemble_system(const AcovPair& acov, const GroupLayout& layout);

/// Dense V^(d) = diag(V_1, ..., V_N); for tests and diagnostics.
Mat block_diagonal_design(const YwSystem& sys);

}  // namespace splash
