#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "splash/errors.hpp"
#include "splash/model.hpp"
#include "splash/simulate.hpp"
#include "test_util.hpp"

using namespace splash;

namespace {

StModel diagonal_b_model(std::size_t n, double b) {
  StModel m;
  m.a = Mat(n, n);
  m.b = b * Mat::identity(n);
  m.sigma_eps = Mat::identity(n);
  return m;
}

}  // namespace

TEST_CASE("model_violations names each broken invariant") {
  StModel m = diagonal_b_model(4, 0.5);
  CHECK(model_violations(m).empty());
  m.a(1, 1) = 0.1;
  CHECK(model_violations(m).size() == 1);
  CHECK_THROWS_AS(validate(m), InvalidArgument);
  m = diagonal_b_model(4, 0.5);
  m.b(0, 3) = 0.1;  // outside bandwidth_k = 0
  CHECK(model_violations(m).size() == 1);
  m = diagonal_b_model(4, 0.5);
  m.sigma_eps(0, 1) = 0.5;
  CHECK(model_violations(m).size() == 2);  // not symmetric, outside l0
  m = diagonal_b_model(4, 0.5);
  m.sigma_eps(2, 2) = -1.0;
  CHECK(model_violations(m).size() == 1);
}

TEST_CASE("check_stability clauses") {
  const StabilityReport ok = check_stability(diagonal_b_model(3, 0.5), 0.5);
  CHECK(ok.a_bounded);
  CHECK(ok.b_contracts);
  CHECK(ok.norm_a == 0.0);
  CHECK(ok.norm_b == 0.5);
  CHECK(ok.passes());
  CHECK(ok.spectral_norm_c == doctest::Approx(0.5));

  StModel bad = diagonal_b_model(3, 0.1);
  bad.a(0, 1) = 0.6;
  bad.a(0, 2) = 0.6;  // row sum 1.2
  bad.bandwidth_k = 2;
  const StabilityReport r = check_stability(bad, 0.9);
  CHECK_FALSE(r.a_bounded);
  CHECK_FALSE(r.passes());
  CHECK_THROWS_AS(check_stability(bad, 1.0), InvalidArgument);

  // Design B: ||A|| = 0.8 and C_B = 0.25, so the sufficient condition fails
  // even though the reduced form is stable.
  const StabilityReport b = check_stability(gen_design_b(5), 0.9);
  CHECK(b.a_bounded);
  CHECK_FALSE(b.b_contracts);
  CHECK(b.spectral_norm_c == doctest::Approx(0.814).epsilon(1e-3 / 0.814));
}

TEST_CASE("reduced_form") {
  const StModel m0 = diagonal_b_model(3, 0.4);
  const ReducedForm rf0 = reduced_form(m0);
  CHECK(testutil::max_abs_diff(rf0.c, m0.b) == 0.0);
  CHECK(testutil::max_abs_diff(rf0.d, Mat::identity(3)) == 0.0);

  const ReducedForm scalar = reduced_form(diagonal_b_model(1, 0.5));
  CHECK(scalar.c(0, 0) == 0.5);

  Rng rng({21, 0});
  for (int rep = 0; rep < 10; ++rep) {
    const StModel m = testutil::random_stable_model(6, rng);
    const ReducedForm rf = reduced_form(m);
    const Mat ia = Mat::identity(6) - m.a;
    CHECK(norm_max(matmul(ia, rf.c) - m.b) <= 1e-10);
    CHECK(norm_max(matmul(ia, rf.d) - Mat::identity(6)) <= 1e-10);
  }

  StModel singular = diagonal_b_model(2, 0.1);
  singular.a = Mat::from_rows({{0, 1}, {1, 0}});
  singular.bandwidth_k = 1;
  CHECK_THROWS_AS(reduced_form(singular), SingularMatrixError);
}

TEST_CASE("population_autocov: closed forms") {
  ReducedForm zero{Mat(2, 2), Mat::from_rows({{1, 0.5}, {0, 1}})};
  const Mat sig = Mat::identity(2);
  const Mat s0 = population_autocov(zero, sig, 0);
  CHECK(norm_max(s0 - matmul(zero.d, transpose(zero.d))) <= 1e-15);
  CHECK(norm_max(population_autocov(zero, sig, 1)) == 0.0);

  ReducedForm ar{Mat::from_rows({{0.5}}), Mat::identity(1)};
  CHECK(population_autocov(ar, Mat::identity(1), 0)(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-11));
  CHECK(population_autocov(ar, Mat::identity(1), 1)(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-11));
}

TEST_CASE("population_autocov: Lyapunov residual and Kronecker oracle") {
  Rng rng({22, 0});
  for (int rep = 0; rep < 10; ++rep) {
    const StModel m = testutil::random_stable_model(4, rng);
    const ReducedForm rf = reduced_form(m);
    const double tol = 1e-12;
    const Mat s0 = population_autocov(rf, m.sigma_eps, 0, tol);
    const Mat q = matmul(matmul(rf.d, m.sigma_eps), transpose(rf.d));
    CHECK(norm_max(s0 - matmul(matmul(rf.c, s0), transpose(rf.c)) - q) <= 10 * tol);
    CHECK(norm_max(s0 - oracle::lyapunov(rf.c, q)) <= 1e-10);
    CHECK(norm_max(s0 - transpose(s0)) == 0.0);
    CHECK(symmetric_eigen(s0).values.front() > 0.0);
  }
}

TEST_CASE("population Yule-Walker identity Sigma1 = A Sigma1 + B Sigma0") {
  Rng rng({23, 0});
  for (int rep = 0; rep < 10; ++rep) {
    const StModel m = testutil::random_stable_model(3 + rep % 5, rng);
    const ReducedForm rf = reduced_form(m);
    const Mat s0 = population_autocov(rf, m.sigma_eps, 0);
    const Mat s1 = population_autocov(rf, m.sigma_eps, 1);
    CHECK(norm_max(s1 - matmul(m.a, s1) - matmul(m.b, s0)) <= 1e-10);
  }
}

TEST_CASE("population_autocov diverges for unstable C") {
  ReducedForm rf{Mat::from_rows({{1.05}}), Mat::identity(1)};
  CHECK_THROWS_AS(population_autocov(rf, Mat::identity(1), 0, 1e-12, 10'000), ConvergenceError);
}

TEST_CASE("population autocovariances of a banded design decay off the band") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const StModel m = gen_design_a(24, 1, {seed, 0});
    const ReducedForm rf = reduced_form(m);
    const Mat s0 = population_autocov(rf, m.sigma_eps, 0);
    double near = 0.0, far = 0.0;
    for (std::size_t i = 0; i < 24; ++i)
      for (std::size_t j = 0; j < 24; ++j) {
        const std::size_t d = i > j ? i - j : j - i;
        if (d <= 1) near = std::max(near, std::abs(s0(i, j)));
        if (d > 4) far = std::max(far, std::abs(s0(i, j)));
      }
    CHECK(far < near);
  }
}
