#include <doctest.h>

#include <cmath>
#include <numeric>

#include "splash/autocov.hpp"
#include "splash/errors.hpp"
#include "splash/simulate.hpp"
#include "test_util.hpp"

using namespace splash;

namespace {

StModel white_noise(std::size_t n) {
  StModel m;
  m.a = Mat(n, n);
  m.b = Mat(n, n);
  m.sigma_eps = Mat::identity(n);
  return m;
}

}  // namespace

TEST_CASE("sample_autocov: hand computations") {
  const Panel one(Mat::from_rows({{1, 2, 3}}));
  CHECK(sample_autocov(one, 1)(0, 0) == doctest::Approx(8.0 / 3.0));
  // lag 0 sums t = 2..T: (4 + 9) / 3
  CHECK(sample_autocov(one, 0)(0, 0) == doctest::Approx(13.0 / 3.0));

  const std::size_t t = 6;
  Mat v(2, t);
  for (std::size_t s = 0; s < t; ++s) {
    v(0, s) = 1.5;
    v(1, s) = -2.0;
  }
  const Mat s0 = sample_autocov(Panel(v), 0);
  const double f = (t - 1.0) / t;
  CHECK(s0(0, 0) == doctest::Approx(f * 2.25));
  CHECK(s0(0, 1) == doctest::Approx(f * -3.0));
  CHECK(s0(1, 1) == doctest::Approx(f * 4.0));
  CHECK_THROWS_AS(sample_autocov(one, 2), InvalidArgument);
  CHECK_THROWS_AS(sample_autocov(Panel(Mat::from_rows({{1, 2}})), 1), InvalidArgument);
}

TEST_CASE("sample_autocov: OpenMP kernel equals the serial reference") {
  Rng rng({41, 0});
  const Panel p(testutil::random_mat(40, 300, rng));
  for (std::size_t lag = 0; lag <= 1; ++lag) CHECK(sample_autocov(p, lag) == serial::sample_autocov(p, lag));
  const Mat s0 = sample_autocov(p, 0);
  CHECK(s0 == transpose(s0));
}

TEST_CASE("sample_autocov approaches the population values") {
  const StModel m = gen_design_a(16, 1, {42, 0});
  const Panel p = simulate_var(m, 60'000, 500, {42, 1});
  const ReducedForm rf = reduced_form(m);
  CHECK(norm_max(sample_autocov(p, 0) - population_autocov(rf, m.sigma_eps, 0)) <= 0.05);
  CHECK(norm_max(sample_autocov(p, 1) - population_autocov(rf, m.sigma_eps, 1)) <= 0.05);
}

TEST_CASE("banded_autocov") {
  Rng rng({43, 0});
  const Panel p(testutil::random_mat(6, 50, rng));
  const AcovPair full = unbanded_autocov(p);
  CHECK_FALSE(full.h.has_value());
  const AcovPair wide = banded_autocov(p, 5);
  CHECK(wide.sigma0 == full.sigma0);
  CHECK(wide.sigma1 == full.sigma1);
  const AcovPair diag = banded_autocov(p, 0);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j)
      if (i != j) {
        CHECK(diag.sigma0(i, j) == 0.0);
        CHECK(diag.sigma1(i, j) == 0.0);
      }
  const AcovPair two = banded_autocov(p, 2);
  CHECK(*two.h == 2);
  CHECK(two.sigma0 == band(sample_autocov(p, 0), 2));
  CHECK(two.sigma1 == band(sample_autocov(p, 1), 2));
}

TEST_CASE("select_bandwidth: white noise picks a small band") {
  const std::vector<std::size_t> grid{0, 1, 2, 3, 4, 5, 6};
  int small = 0;
  const int runs = 20;
  for (int r = 0; r < runs; ++r) {
    const Panel p = simulate_var(white_noise(10), 400, 0, {44, static_cast<std::uint64_t>(r)});
    const std::size_t h = select_bandwidth(p, grid, 50, default_block_len(400), {44, 1000u + r});
    small += h <= 2;
  }
  CHECK(small >= 0.9 * runs);
}

TEST_CASE("select_bandwidth: dense covariance picks the widest band") {
  const std::vector<std::size_t> grid{0, 1, 2, 3, 4, 5, 6};
  const std::size_t n = 10;
  StModel m = white_noise(n);
  // Equicorrelated innovations: every off-diagonal covariance is 0.6.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m.sigma_eps(i, j) = i == j ? 1.0 : 0.6;
  m.bandwidth_l0 = n - 1;
  int widest = 0;
  const int runs = 20;
  for (int r = 0; r < runs; ++r) {
    const Panel p = simulate_var(m, 400, 0, {45, static_cast<std::uint64_t>(r)});
    widest += select_bandwidth(p, grid, 50, default_block_len(400), {45, 1000u + r}) == 6;
  }
  CHECK(widest >= 0.9 * runs);
}

TEST_CASE("select_bandwidth: determinism and argument checks") {
  const Panel p = simulate_var(gen_design_b(3), 200, 50, {46, 0});
  const std::vector<std::size_t> grid{0, 1, 2, 3, 4};
  CHECK(select_bandwidth(p, grid, 20, 5, {46, 1}) == select_bandwidth(p, grid, 20, 5, {46, 1}));
  CHECK_THROWS_AS(select_bandwidth(p, grid, 0, 5, {46, 1}), InvalidArgument);
  CHECK_THROWS_AS(select_bandwidth(p, {}, 20, 5, {46, 1}), InvalidArgument);
  CHECK_THROWS_AS(select_bandwidth(p, grid, 20, 200, {46, 1}), InvalidArgument);
  CHECK(default_block_len(1000) == 10);
  CHECK(default_block_len(1001) == 11);
}
