#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "splash/linalg.hpp"
#include "splash/model.hpp"
#include "splash/rng.hpp"

namespace splash {

/// N x T observation matrix; column t is y_t.
struct Panel {
  Mat values;
  std::vector<std::string> unit_labels;

  Panel() = default;
  explicit Panel(Mat v, std::vector<std::string> labels = {});

  std::size_t n_units() const noexcept { return values.rows(); }
  std::size_t n_time() const noexcept { return values.cols(); }
  Vec column(std::size_t t) const { return values.column(t); }
  /// Columns [begin, end).
  Panel slice(std::size_t begin, std::size_t end) const;
};

std::vector<std::string> default_labels(std::size_t n);

inline constexpr double kDesignARedrawThreshold = 0.95;

/// Banded random design: entries at |i-j| = k0 are +-2 with equal
/// probability, the rest of the band is 0 w.p. 0.4 and N(0,1) otherwise, then
/// A and B are rescaled to spectral norms eta1, eta2 ~ U[0.4, 0.8]. Redrawn
/// until ||(I-A)^{-1} B||_2 <= 0.95.
StModel gen_design_a(std::size_t n, std::size_t k0, RngSpec rng, std::size_t max_redraws = 1000);

/// m x m grid, units enumerated row-wise; a_ij = interaction for first
/// horizontal and vertical neighbours, B = b_diag * I, Sigma_eps = I.
StModel gen_design_b(std::size_t m, double interaction = 0.2, double b_diag = 0.25);

/// Spectral radius of C below one, certified through ||C^(2^k)||_2 < 1.
bool is_stable_transition(const Mat& c);

/// Iterates y_s = C y_{s-1} + D eps_s from y_0 = 0 for burn_in + t steps and
/// keeps the last t. Innovations are standard normal, coloured by the
/// Cholesky factor of Sigma_eps unless it is the identity.
Panel simulate_var(const StModel& model, std::size_t t, std::size_t burn_in, RngSpec rng);

}  // namespace splash
