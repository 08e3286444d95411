#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "splash/benchmarks.hpp"
#include "splash/errors.hpp"
#include "splash/solver.hpp"
#include "test_util.hpp"

using namespace splash;

namespace {

AcovPair population_pair(const StModel& m) {
  const ReducedForm rf = reduced_form(m);
  return {population_autocov(rf, m.sigma_eps, 0), population_autocov(rf, m.sigma_eps, 1),
          std::nullopt};
}

}  // namespace

TEST_CASE("SupportSet construction") {
  const SupportSet s = SupportSet::banded(6, 1);
  std::size_t count = 0;
  for (const CoefKey& k : s.entries()) {
    const std::size_t d = k.i > k.j ? k.i - k.j : k.j - k.i;
    CHECK(d <= 1);
    CHECK_FALSE((k.matrix == CoefMatrix::A && k.i == k.j));
    ++count;
  }
  CHECK(count == 10 + 16);
  CHECK_THROWS_AS(SupportSet(3, {{CoefMatrix::A, 1, 1}}), InvalidArgument);
  CHECK_THROWS_AS(SupportSet(3, {{CoefMatrix::B, 3, 1}}), InvalidArgument);
  const auto eq = SupportSet::from_model(gen_design_b(3)).equation(4);
  // Centre of the 3x3 grid: four neighbours in A, own lag in B.
  CHECK(eq.size() == 5);
  CHECK(eq.back().matrix == CoefMatrix::B);
}

TEST_CASE("gmwy_fit: exact recovery on population autocovariances") {
  const StModel m = gen_design_b(5);
  const GmwyFit cs = gmwy_fit(population_pair(m), SupportSet::from_model(m));
  CHECK(norm_max(cs.a - m.a) <= 1e-8);
  CHECK(norm_max(cs.b - m.b) <= 1e-8);
  CHECK(cs.pseudo_inverse_equations.empty());

  // On the banded support most design B equations are rank deficient in
  // population: the fit still satisfies every moment equation exactly.
  const AcovPair pop = population_pair(m);
  const GmwyFit k0 = gmwy_fit(pop, SupportSet::banded(25, 5));
  CHECK_FALSE(k0.pseudo_inverse_equations.empty());
  CHECK(norm_max(pop.sigma1 - matmul(k0.a, pop.sigma1) - matmul(k0.b, pop.sigma0)) <= 1e-10);

  // Design A, k0 = 2: rows 0, 4..11 and 15 are identified.
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const StModel d = gen_design_a(16, 2, {seed, 0});
    const GmwyFit g = gmwy_fit(population_pair(d), SupportSet::banded(16, 2));
    for (std::size_t i : {0, 4, 5, 6, 7, 8, 9, 10, 11, 15})
      for (std::size_t j = 0; j < 16; ++j) {
        CHECK(std::abs(g.a(i, j) - d.a(i, j)) <= 1e-8);
        CHECK(std::abs(g.b(i, j) - d.b(i, j)) <= 1e-8);
      }
  }
}

TEST_CASE("gmwy_fit: unsupported equations give zero rows; oversized supports are rejected") {
  Rng rng({71, 0});
  const Panel p(testutil::random_mat(6, 60, rng));
  const SupportSet only_first(6, {{CoefMatrix::A, 0, 1}, {CoefMatrix::B, 0, 0}});
  const GmwyFit g = gmwy_fit(p, only_first);
  for (std::size_t i = 1; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      CHECK(g.a(i, j) == 0.0);
      CHECK(g.b(i, j) == 0.0);
    }
  CHECK(g.a(0, 1) != 0.0);
  CHECK_THROWS_AS(gmwy_fit(p, SupportSet::banded(6, 5)), InvalidArgument);
  CHECK_THROWS_AS(gmwy_fit(Panel(Mat(6, 0)), only_first), InvalidArgument);
}

TEST_CASE("gmwy_fit equals per-equation normal equations and matches SPLASH at lambda = 0") {
  Rng rng({72, 0});
  const Panel p(testutil::random_mat(12, 200, rng));
  const SupportSet s = SupportSet::banded(12, 2);
  const GmwyFit g = gmwy_fit(p, s);
  const AcovPair acov = unbanded_autocov(p);
  const GroupLayout layout = build_layout(12, 2);
  const YwSystem sys = assemble_system(acov, layout);
  for (std::size_t i = 0; i < 12; ++i) {
    const auto seg = sys.target_segment(i);
    const Vec ref = oracle::normal_equations(sys.blocks[i], Vec(seg.begin(), seg.end()));
    const auto cols = layout.equation_columns(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const double got = cols[k].matrix == CoefMatrix::A ? g.a(i, cols[k].j) : g.b(i, cols[k].j);
      CHECK(got == doctest::Approx(ref[k]).epsilon(1e-8));
    }
  }
  const SplashFit f = fit(sys, 0.0, 0.5);
  CHECK(norm_max(f.a_hat - g.a) <= 1e-6);
  CHECK(norm_max(f.b_hat - g.b) <= 1e-6);
}

TEST_CASE("gmwy_fit: rank-deficient normal matrices fall back to the pseudo-inverse") {
  Mat v(6, 30);
  Rng rng({73, 0});
  for (std::size_t t = 0; t < 30; ++t) {
    const double z = rng.normal();
    for (std::size_t i = 0; i < 6; ++i) v(i, t) = z;  // every unit identical
  }
  const GmwyFit g = gmwy_fit(Panel(v), SupportSet::banded(6, 1));
  CHECK_FALSE(g.pseudo_inverse_equations.empty());
  CHECK(all_finite(g.a));
  CHECK(all_finite(g.b));
}

TEST_CASE("pvar: lambda_max, least squares, determinism, monotone objective") {
  Rng rng({74, 0});
  const StModel m = testutil::random_stable_model(6, rng);
  const Panel p = simulate_var(m, 2000, 100, {74, 1});
  const PvarProblem prob(p);
  const double lm = prob.lambda_max();
  CHECK(norm_max(prob.fit(lm).c) == 0.0);
  CHECK(norm_max(prob.fit(0.95 * lm).c) > 0.0);

  // lambda = 0 against the normal equations of y_t on y_{t-1}.
  const PvarFit ls = prob.fit(0.0, 1e-13);
  Mat x(p.n_time() - 1, 6);
  for (std::size_t t = 1; t < p.n_time(); ++t)
    for (std::size_t j = 0; j < 6; ++j) x(t - 1, j) = p.values(j, t - 1);
  for (std::size_t i = 0; i < 6; ++i) {
    Vec y(p.n_time() - 1);
    for (std::size_t t = 1; t < p.n_time(); ++t) y[t - 1] = p.values(i, t);
    const Vec ref = oracle::normal_equations(x, y);
    for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(ls.c(i, j) - ref[j]) <= 1e-8);
  }
  CHECK(pvar_fit(p, 0.1 * lm).c == pvar_fit(p, 0.1 * lm).c);

  // Objective decreases along a truncated run: more sweeps never hurt.
  const double lam = 0.01 * lm;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t iters : {1, 2, 4, 8, 16}) {
    try {
      const PvarFit f = prob.fit(lam, 1e-300, iters);
      (void)f;
    } catch (const ConvergenceError& e) {
      Mat c(6, 6, std::vector<double>(e.last_iterate()));
      double obj = 0.0;
      for (std::size_t i = 0; i < 6; ++i) obj += prob.row_objective(i, c.row(i), lam);
      CHECK(obj <= prev + 1e-9);
      prev = obj;
    }
  }
  CHECK_THROWS_AS(prob.fit(-1.0), InvalidArgument);
}

TEST_CASE("const_forecast and one-step forecasts") {
  const Panel c(Mat::from_rows({{2, 2, 2}, {-1, -1, -1}}));
  CHECK(const_forecast(c) == Vec{2, -1});
  CHECK(const_forecast(Panel(Mat::from_rows({{5}, {6}}))) == Vec{5, 6});
  CHECK(const_forecast(Panel(Mat::from_rows({{1, 3}}))) == Vec{2});

  Rng rng({75, 0});
  const Mat b = testutil::random_mat(4, 4, rng);
  const Vec y{1, 2, 3, 4};
  const Vec f = forecast_one_step(Mat(4, 4), b, y);
  const Vec by = matvec(b, y);
  for (std::size_t i = 0; i < 4; ++i) CHECK(f[i] == doctest::Approx(by[i]));
  for (double v : forecast_one_step(Mat(4, 4), b, Vec(4, 0.0))) CHECK(v == 0.0);

  const StModel m = gen_design_b(4);
  const GmwyFit g = gmwy_fit(population_pair(m), SupportSet::from_model(m));
  const Vec fc = forecast_one_step(g.a, g.b, Vec(16, 1.0));
  const Vec truth = matvec(reduced_form(m).c, Vec(16, 1.0));
  for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(fc[i] - truth[i]) <= 1e-8);

  const Mat sing = Mat::from_rows({{0, 1}, {1, 0}});
  CHECK_THROWS_AS(forecast_one_step(sing, Mat(2, 2), Vec{1, 1}), SingularMatrixError);
}
