#include "splash/simulate.hpp"

#include <algorithm>
#include <cmath>

namespace splash {

Panel::Panel(Mat v, std::vector<std::string> labels)
    : values(std::move(v)), unit_labels(std::move(labels)) {
  if (unit_labels.empty()) unit_labels = default_labels(values.rows());
  if (unit_labels.size() != values.rows()) {
    throw InvalidArgument("Panel: label count does not match unit count");
  }
}

Panel Panel::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > n_time()) throw InvalidArgument("Panel::slice: bad range");
  Mat out(n_units(), end - begin);
  for (std::size_t i = 0; i < n_units(); ++i)
    for (std::size_t t = begin; t < end; ++t) out(i, t - begin) = values(i, t);
  return Panel(std::move(out), unit_labels);
}

std::vector<std::string> default_labels(std::size_t n) {
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back("y" + std::to_string(i + 1));
  return out;
}

StModel gen_design_a(std::size_t n, std::size_t k0, RngSpec spec, std::size_t max_redraws) {
  if (n < 4) throw InvalidArgument("gen_design_a: n must be at least 4");
  if (k0 == 0 || k0 >= n / 4) {
    throw InvalidArgument("gen_design_a: need 1 <= k0 < floor(n/4)");
  }
  Rng rng(spec);
  for (std::size_t attempt = 0; attempt < max_redraws; ++attempt) {
    Mat a(n, n), b(n, n);
    auto draw = [&](std::size_t dist) {
      if (dist == k0) return rng.bernoulli(0.5) ? 2.0 : -2.0;
      // mixture: point mass at zero w.p. 0.4, N(0,1) otherwise
      const bool zero = rng.bernoulli(0.4);
      const double z = rng.normal();
      return zero ? 0.0 : z;
    };
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i > k0 ? i - k0 : 0;
      const std::size_t hi = std::min(n, i + k0 + 1);
      for (std::size_t j = lo; j < hi; ++j) {
        const std::size_t dist = i > j ? i - j : j - i;
        if (i != j) a(i, j) = draw(dist);
        b(i, j) = draw(dist);
      }
    }
    const double eta1 = rng.uniform(0.4, 0.8);
    const double eta2 = rng.uniform(0.4, 0.8);
    const double na = spectral_norm(a);
    const double nb = spectral_norm(b);
    if (na == 0.0 || nb == 0.0) continue;
    a = (eta1 / na) * a;
    b = (eta2 / nb) * b;

    StModel m{std::move(a), std::move(b), Mat::identity(n), k0, 0};
    try {
      if (spectral_norm(reduced_form(m).c) <= kDesignARedrawThreshold) return m;
    } catch (const SingularMatrixError&) {
    }
  }
  throw SplashError("gen_design_a: no stable draw within max_redraws");
}

StModel gen_design_b(std::size_t m, double interaction, double b_diag) {
  if (m < 2) throw InvalidArgument("gen_design_b: m must be at least 2");
  const std::size_t n = m * m;
  Mat a(n, n);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      const std::size_t u = r * m + c;
      if (c + 1 < m) a(u, u + 1) = a(u + 1, u) = interaction;
      if (r + 1 < m) a(u, u + m) = a(u + m, u) = interaction;
    }
  }
  Mat b = b_diag * Mat::identity(n);
  return StModel{std::move(a), std::move(b), Mat::identity(n), m, 0};
}

bool is_stable_transition(const Mat& c) {
  Mat power = c;
  for (int k = 0; k < 8; ++k) {
    if (spectral_norm(power, 1e-10, 100000) < 1.0) return true;
    power = matmul(power, power);
    if (!all_finite(power)) return false;
  }
  return false;
}

namespace {

// Lower Cholesky factor; throws on a non-PD input.
Mat cholesky(const Mat& s) {
  const std::size_t n = s.rows();
  Mat l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = s(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) throw InvalidArgument("cholesky: matrix not positive definite");
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  return l;
}

}  // namespace

Panel simulate_var(const StModel& model, std::size_t t, std::size_t burn_in, RngSpec spec) {
  if (t < 2) throw InvalidArgument("simulate_var: need t >= 2");
  validate(model);
  const ReducedForm rf = reduced_form(model);
  if (!is_stable_transition(rf.c)) throw SplashError("simulate_var: model is not stable");
  const std::size_t n = model.n();
  const bool white = model.sigma_eps == Mat::identity(n);
  // D * L maps standard normals to D eps.
  const Mat shock = white ? rf.d : matmul(rf.d, cholesky(model.sigma_eps));

  Rng rng(spec);
  Mat out(n, t);
  Vec y(n, 0.0), z(n), next(n);
  for (std::size_t s = 0; s < burn_in + t; ++s) {
    for (auto& v : z) v = rng.normal();
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      auto ci = rf.c.row(i);
      auto di = shock.row(i);
      for (std::size_t j = 0; j < n; ++j) acc += ci[j] * y[j] + di[j] * z[j];
      next[i] = acc;
    }
    y.swap(next);
    if (s >= burn_in) {
      for (std::size_t i = 0; i < n; ++i) out(i, s - burn_in) = y[i];
    }
  }
  return Panel(std::move(out));
}

}  // namespace splash
