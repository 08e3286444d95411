#include "splash/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace splash {

std::vector<std::string> model_violations(const StModel& m) {
  std::vector<std::string> out;
  const std::size_t n = m.a.rows();
  auto square_n = [&](const Mat& x) { return x.rows() == n && x.cols() == n; };
  if (n == 0) out.emplace_back("model has no units");
  if (!square_n(m.a) || !square_n(m.b) || !square_n(m.sigma_eps)) {
    out.emplace_back("A, B and Sigma_eps must all be N x N");
    return out;
  }
  if (!all_finite(m.a) || !all_finite(m.b) || !all_finite(m.sigma_eps)) {
    out.emplace_back("non-finite entry");
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (m.a(i, i) != 0.0) {
      out.emplace_back("A has a nonzero diagonal entry at " + std::to_string(i));
      break;
    }
  }
  bool band_ok = true;
  bool sigma_band_ok = true;
  bool symmetric = true;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t dist = i > j ? i - j : j - i;
      if (dist > m.bandwidth_k && (m.a(i, j) != 0.0 || m.b(i, j) != 0.0)) band_ok = false;
      if (dist > m.bandwidth_l0 && m.sigma_eps(i, j) != 0.0) sigma_band_ok = false;
      if (m.sigma_eps(i, j) != m.sigma_eps(j, i)) symmetric = false;
    }
  }
  if (!band_ok) out.emplace_back("A or B has entries outside bandwidth_k");
  if (!sigma_band_ok) out.emplace_back("Sigma_eps has entries outside bandwidth_l0");
  if (!symmetric) {
    out.emplace_back("Sigma_eps is not symmetric");
  } else {
    const SymmetricEigen eig = symmetric_eigen(m.sigma_eps);
    if (!(eig.values.front() > 0.0)) out.emplace_back("Sigma_eps is not positive definite");
  }
  return out;
}

void validate(const StModel& m) {
  const auto v = model_violations(m);
  if (v.empty()) return;
  std::ostringstream os;
  os << "invalid model:";
  for (const auto& s : v) os << ' ' << s << ';';
  throw InvalidArgument(os.str());
}

StabilityReport check_stability(const StModel& m, double delta_a) {
  if (!(delta_a > 0.0 && delta_a < 1.0)) {
    throw InvalidArgument("check_stability: delta_a must lie in (0, 1)");
  }
  StabilityReport r;
  r.delta_a = delta_a;
  r.norm_a = norm_one_inf(m.a);
  r.norm_b = norm_one_inf(m.b);
  r.a_bounded = r.norm_a <= delta_a;
  // The contraction clause holds for some admissible delta_A iff it holds at
  // delta_A = ||A||, so the tightest bound is used.
  r.b_contracts = r.norm_a < 1.0 && r.norm_b / (1.0 - r.norm_a) < 1.0;
  try {
    r.spectral_norm_c = spectral_norm(reduced_form(m).c);
  } catch (const SplashError&) {
    r.spectral_norm_c = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

ReducedForm reduced_form(const StModel& m) {
  const std::size_t n = m.a.rows();
  if (m.a.cols() != n || m.b.rows() != n || m.b.cols() != n) {
    throw InvalidArgument("reduced_form: A and B must be N x N");
  }
  const Mat i_minus_a = Mat::identity(n) - m.a;
  ReducedForm rf;
  rf.d = solve_linear(i_minus_a, Mat::identity(n));
  rf.c = solve_linear(i_minus_a, m.b);
  return rf;
}

Mat population_autocov(const ReducedForm& rf, const Mat& sigma_eps, std::size_t lag, double tol,
                       std::size_t max_iter) {
  if (!(tol > 0.0)) throw InvalidArgument("population_autocov: tol must be positive");
  const std::size_t n = rf.c.rows();
  if (rf.c.cols() != n || rf.d.rows() != n || sigma_eps.rows() != n) {
    throw InvalidArgument("population_autocov: dimension mismatch");
  }
  const Mat innovation = matmul(matmul(rf.d, sigma_eps), transpose(rf.d));
  const Mat ct = transpose(rf.c);
  Mat s = innovation;
  double change = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  for (; it < max_iter; ++it) {
    Mat next = matmul(matmul(rf.c, s), ct) + innovation;
    change = 0.0;
    for (std::size_t k = 0; k < next.data().size(); ++k)
      change = std::max(change, std::abs(next.data()[k] - s.data()[k]));
    if (!all_finite(next)) change = std::numeric_limits<double>::infinity();
    s = std::move(next);
    if (!std::isfinite(change)) break;
    if (change <= tol) break;
  }
  if (!(change <= tol)) {
    throw ConvergenceError("population_autocov: Lyapunov iteration did not converge",
                           Vec(s.data().begin(), s.data().end()), change, it);
  }
  // Symmetrize away rounding asymmetry.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (s(i, j) + s(j, i));
      s(i, j) = avg;
      s(j, i) = avg;
    }
  for (std::size_t k = 0; k < lag; ++k) s = matmul(rf.c, s);
  return s;
}

}  // namespace splash
