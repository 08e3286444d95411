#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "splash/linalg.hpp"
#include "splash/rng.hpp"
#include "splash/simulate.hpp"

namespace splash {

struct AcovPair {
  Mat sigma0;
  Mat sigma1;
  std::optional<std::size_t> h;  // bandwidth applied, if any
};

/// (1/T) sum_{t} y_t y_{t-lag}' over t = lag+1..T (t = 2..T for lag 0). The
/// divisor is the full sample length T. lag must be 0 or 1.
/// OpenMP-parallel over rows; bit-identical to serial::sample_autocov.
Mat sample_autocov(const Panel& p, std::size_t lag);

namespace serial {
Mat sample_autocov(const Panel& p, std::size_t lag);
}  // namespace serial

AcovPair unbanded_autocov(const Panel& p);
AcovPair banded_autocov(const Panel& p, std::size_t h);

inline std::size_t default_block_len(std::size_t n_time) {
  std::size_t b = 1;
  while (b * b * b < n_time) ++b;
  return b;
}

/// Picks the banding level from h_grid by a repeated sample-split risk
/// estimate. Each of n_boot replicates draws a split point, leaves a gap of
/// block_len observations, bands the lag-0/lag-1 autocovariances of one
/// segment and scores them against the unbanded autocovariances of the other:
///   risk(h) = ||B_h(S0_fit) - S0_ref||_F^2 + ||B_h(S1_fit) - S1_ref||_F^2.
/// Returns the h with the smallest average risk (ties go to the smaller h).
std::size_t select_bandwidth(const Panel& p, std::span<const std::size_t> h_grid,
                             std::size_t n_boot, std::size_t block_len, RngSpec rng);

}  // namespace splash
