#pragma once

#include <cmath>
#include <cstddef>

#include "splash/linalg.hpp"
#include "splash/model.hpp"
#include "splash/rng.hpp"

namespace testutil {

inline splash::Mat random_mat(std::size_t r, std::size_t c, splash::Rng& rng) {
  splash::Mat m(r, c);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

inline double max_abs_diff(const splash::Mat& a, const splash::Mat& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k)
    d = std::max(d, std::abs(a.data()[k] - b.data()[k]));
  return d;
}

/// Dense (full bandwidth) stable model with a zero-diagonal A and identity
/// innovation covariance: entries are drawn, then A and B are scaled so that
/// ||A||_{1 v inf} <= 0.3 and ||B||_{1 v inf} <= 0.5.
inline splash::StModel random_stable_model(std::size_t n, splash::Rng& rng) {
  splash::StModel m;
  m.a = random_mat(n, n, rng);
  for (std::size_t i = 0; i < n; ++i) m.a(i, i) = 0.0;
  m.b = random_mat(n, n, rng);
  const double sa = splash::norm_one_inf(m.a), sb = splash::norm_one_inf(m.b);
  m.a = (0.3 / sa) * m.a;
  m.b = (0.5 / sb) * m.b;
  m.sigma_eps = splash::Mat::identity(n);
  m.bandwidth_k = n - 1;
  m.bandwidth_l0 = 0;
  return m;
}

}  // namespace testutil

#include "splash/autocov.hpp"
#include "splash/simulate.hpp"
#include "splash/yule_walker.hpp"

namespace testutil {

/// System built from a short simulated panel of a random banded model.
inline splash::YwSystem random_system(std::size_t n, std::size_t cap, std::size_t t,
                                      splash::Rng& rng) {
  splash::StModel m = random_stable_model(n, rng);
  m.a = splash::band(m.a, cap);
  m.b = splash::band(m.b, cap);
  m.bandwidth_k = cap;
  const splash::Panel p = splash::simulate_var(m, t, 50, {rng.next_u64(), 0});
  return splash::assemble_system(splash::unbanded_autocov(p), splash::build_layout(n, cap));
}

}  // namespace testutil
