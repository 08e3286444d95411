#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "splash/errors.hpp"
#include "splash/simulate.hpp"
#include "splash/solver.hpp"
#include "splash/yule_walker.hpp"
#include "test_util.hpp"

using namespace splash;

TEST_CASE("build_layout: group counts, sizes and weights") {
  const GroupLayout l = build_layout(8, 2);
  std::size_t na = 0, nb = 0;
  for (const Group& g : l.groups) (g.matrix == CoefMatrix::A ? na : nb)++;
  CHECK(na == 2);
  CHECK(nb == 3);
  CHECK(l.groups[0].matrix == CoefMatrix::A);
  CHECK(l.groups[0].diagonal == 1);
  CHECK(l.groups[0].members.size() == 14);
  CHECK(l.groups[2].matrix == CoefMatrix::B);
  CHECK(l.groups[2].diagonal == 0);
  CHECK(l.groups[2].members.size() == 8);
  for (const Group& g : l.groups)
    CHECK(g.weight == std::sqrt(static_cast<double>(g.members.size())));
}

TEST_CASE("build_layout: positions partition the admissible entries") {
  const std::size_t n = 12, cap = 3;
  const GroupLayout l = build_layout(n, cap);
  std::set<std::size_t> seen;
  for (const Group& g : l.groups)
    for (std::size_t pos : g.members) CHECK(seen.insert(pos).second);
  CHECK(seen.size() == l.size());
  std::size_t admissible = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t d = i > j ? i - j : j - i;
      if (d > cap) {
        CHECK_FALSE(l.position(CoefMatrix::A, i, j).has_value());
        CHECK_FALSE(l.position(CoefMatrix::B, i, j).has_value());
        continue;
      }
      if (i != j) {
        ++admissible;
        const auto p = l.position(CoefMatrix::A, i, j);
        REQUIRE(p.has_value());
        CHECK(l.coeffs[*p] == CoefKey{CoefMatrix::A, i, j});
        CHECK(l.groups[l.group_of[*p]].diagonal == d);
      } else {
        CHECK_FALSE(l.position(CoefMatrix::A, i, i).has_value());
      }
      ++admissible;
      CHECK(l.position(CoefMatrix::B, i, j).has_value());
    }
  CHECK(admissible == l.size());
}

TEST_CASE("build_layout: equation-major ordering, A before B, j ascending") {
  const GroupLayout l = build_layout(5, 1);
  // Equation 2 of the 5-unit example, enumerated over [a_2. b_2.].
  std::vector<std::size_t> paper_index;
  for (const CoefKey& k : l.equation_columns(1))
    paper_index.push_back((k.matrix == CoefMatrix::A ? 0 : 5) + k.j + 1);
  CHECK(paper_index == std::vector<std::size_t>{1, 3, 6, 7, 8});
  CHECK(l.equation_size(0) == 3);  // a_12, b_11, b_12
  for (std::size_t p = 1; p < l.size(); ++p) {
    const CoefKey& a = l.coeffs[p - 1];
    const CoefKey& b = l.coeffs[p];
    const bool ordered = a.i < b.i || (a.i == b.i && (a.matrix < b.matrix ||
                                                      (a.matrix == b.matrix && a.j < b.j)));
    CHECK(ordered);
  }
}

TEST_CASE("build_layout: cap limits") {
  CHECK_THROWS_AS(build_layout(8, 3), InvalidArgument);
  CHECK_THROWS_AS(build_layout(8, 0), InvalidArgument);
  CHECK(build_layout(8, 7, true).cap == 7);
  CHECK(default_cap(25) == 6);
  CHECK(default_cap(45) == 11);
}

TEST_CASE("assemble_system: population identity holds for the true coefficients") {
  Rng rng({51, 0});
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t n = 4 + rep % 5;
    const StModel m = testutil::random_stable_model(n, rng);
    const ReducedForm rf = reduced_form(m);
    const AcovPair acov{population_autocov(rf, m.sigma_eps, 0), population_autocov(rf, m.sigma_eps, 1),
                        std::nullopt};
    const GroupLayout layout = build_layout(n, n - 1, true);
    const YwSystem sys = assemble_system(acov, layout);
    CHECK(sys.target.size() == n * n);
    const Vec c = flatten(m.a, m.b, layout);
    const Vec fitted = matvec(block_diagonal_design(sys), c);
    double worst = 0.0;
    for (std::size_t k = 0; k < fitted.size(); ++k)
      worst = std::max(worst, std::abs(fitted[k] - sys.target[k]));
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("assemble_system: target is row i of Sigma1, blocks are the selected columns") {
  Rng rng({52, 0});
  const Panel p(testutil::random_mat(8, 40, rng));
  const AcovPair acov = banded_autocov(p, 3);
  const GroupLayout layout = build_layout(8, 2);
  const YwSystem sys = assemble_system(acov, layout);
  for (std::size_t i = 0; i < 8; ++i) {
    const auto seg = sys.target_segment(i);
    for (std::size_t r = 0; r < 8; ++r) CHECK(seg[r] == acov.sigma1(i, r));
    const auto cols = layout.equation_columns(i);
    REQUIRE(sys.blocks[i].cols() == cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c)
      for (std::size_t r = 0; r < 8; ++r) {
        const double expect = cols[c].matrix == CoefMatrix::A ? acov.sigma1(cols[c].j, r)
                                                              : acov.sigma0(r, cols[c].j);
        CHECK(sys.blocks[i](r, c) == expect);
      }
  }
  const YwSystem zero = assemble_system(unbanded_autocov(Panel(Mat(8, 10))), layout);
  for (double v : zero.target) CHECK(v == 0.0);
  CHECK_THROWS_AS(assemble_system(acov, build_layout(12, 3)), InvalidArgument);
}

TEST_CASE("unpenalised stacked solve equals per-equation least squares") {
  Rng rng({53, 0});
  for (int rep = 0; rep < 5; ++rep) {
    const Panel p(testutil::random_mat(10, 80, rng));
    const YwSystem sys = assemble_system(unbanded_autocov(p), build_layout(10, 2));
    const SplashFit f = fit(sys, 0.0, 0.5);
    for (std::size_t i = 0; i < 10; ++i) {
      const auto seg = sys.target_segment(i);
      const Vec ref = oracle::normal_equations(sys.blocks[i], Vec(seg.begin(), seg.end()));
      for (std::size_t k = 0; k < ref.size(); ++k)
        CHECK(f.c_hat[sys.layout.eq_offset[i] + k] == doctest::Approx(ref[k]).epsilon(1e-8));
    }
  }
}
