#include "splash/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "splash/autocov.hpp"

namespace splash {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Mean squared one-step error of a fitted model over columns [begin, T).
double validation_mse(const Panel& p, std::size_t begin, const EstimateResult& r) {
  double s = 0.0;
  std::size_t count = 0;
  for (std::size_t t = begin; t < p.n_time(); ++t) {
    const Vec prev = p.column(t - 1);
    const Vec f = forecast(r, prev);
    for (std::size_t i = 0; i < p.n_units(); ++i) {
      const double e = p.values(i, t) - f[i];
      s += e * e;
      ++count;
    }
  }
  return count ? s / static_cast<double>(count) : kInf;
}

std::string format_alpha(double a) {
  std::string s = std::to_string(a);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

void CvGrid::validate() const {
  if (!(train_frac > 0.0 && train_frac < 1.0))
    throw InvalidArgument("CvGrid: train_frac must lie in (0, 1)");
  if (alphas.empty()) throw InvalidArgument("CvGrid: alphas must not be empty");
  for (double a : alphas)
    if (!(a >= 0.0 && a <= 1.0)) throw InvalidArgument("CvGrid: alpha outside [0, 1]");
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (!(lambdas[k] >= 0.0) || !std::isfinite(lambdas[k]))
      throw InvalidArgument("CvGrid: lambdas must be finite and non-negative");
    if (k > 0 && lambdas[k] > lambdas[k - 1])
      throw InvalidArgument("CvGrid: lambdas must be descending");
  }
  if (lambdas.empty() && n_lambda == 0) throw InvalidArgument("CvGrid: n_lambda must be positive");
  if (!(lambda_ratio > 0.0 && lambda_ratio <= 1.0))
    throw InvalidArgument("CvGrid: lambda_ratio must lie in (0, 1]");
}

Vec forecast(const EstimateResult& r, std::span<const double> y_last) {
  Vec f = matvec(r.transition, y_last);
  if (!r.intercept.empty())
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += r.intercept[i];
  return f;
}

// --- Estimator defaults -----------------------------------------------------

std::unique_ptr<Estimator> Estimator::adapt(const Panel&, RngSpec) const { return clone(); }

std::vector<std::optional<EstimateResult>> Estimator::fit_path(
    const Panel& train, double alpha, std::span<const double> lambdas) const {
  std::vector<std::optional<EstimateResult>> out;
  for (double lam : lambdas) {
    try {
      out.emplace_back(fit(train, lam, alpha));
    } catch (const SplashError&) {
      out.emplace_back(std::nullopt);
    }
  }
  return out;
}

// --- SPLASH -----------------------------------------------------------------

std::string SplashEstimator::name() const {
  if (!s_.alpha) return "SPLASH(α,λ)";
  return "SPLASH(" + format_alpha(*s_.alpha) + ",λ)";
}

std::unique_ptr<Estimator> SplashEstimator::clone() const {
  return std::make_unique<SplashEstimator>(s_);
}

std::vector<double> SplashEstimator::alphas(const CvGrid& g) const {
  if (s_.alpha) return {*s_.alpha};
  return g.alphas;
}

std::size_t SplashEstimator::resolved_cap(std::size_t n) const {
  return s_.cap ? s_.cap : default_cap(n);
}

std::size_t SplashEstimator::resolved_bandwidth(std::size_t n) const {
  return s_.bandwidth ? *s_.bandwidth : n - 1;
}

std::unique_ptr<Estimator> SplashEstimator::adapt(const Panel& p, RngSpec rng) const {
  SplashSettings s = s_;
  if (!s.bandwidth) {
    const std::size_t n = p.n_units();
    std::vector<std::size_t> grid = s.h_grid;
    if (grid.empty())
      for (std::size_t h = resolved_cap(n); h < n; ++h) grid.push_back(h);
    const std::size_t block = s.block_len ? s.block_len : default_block_len(p.n_time());
    s.bandwidth = select_bandwidth(p, grid, s.n_boot, block, rng);
  }
  return std::make_unique<SplashEstimator>(std::move(s));
}

YwSystem SplashEstimator::system(const Panel& p) const {
  const std::size_t n = p.n_units();
  const GroupLayout layout = build_layout(n, resolved_cap(n));
  const std::size_t h = resolved_bandwidth(n);
  return assemble_system(h + 1 >= n ? unbanded_autocov(p) : banded_autocov(p, h), layout);
}

double SplashEstimator::lambda_max(const Panel& train, double alpha) const {
  const YwSystem sys = system(train);
  return SglSolver(sys).lambda_max(alpha);
}

EstimateResult SplashEstimator::to_result(const SplashFit& f, std::size_t n,
                                          std::size_t h) const {
  EstimateResult r;
  r.transition = transition_matrix(f.a_hat, f.b_hat);
  r.intercept.assign(n, 0.0);
  r.a_hat = f.a_hat;
  r.b_hat = f.b_hat;
  r.lambda = f.lambda;
  r.alpha = f.alpha;
  r.bandwidth = h;
  return r;
}

std::vector<std::optional<EstimateResult>> SplashEstimator::fit_path(
    const Panel& train, double alpha, std::span<const double> lambdas) const {
  const std::size_t n = train.n_units();
  const YwSystem sys = system(train);
  const SglSolver solver(sys);
  std::vector<std::optional<EstimateResult>> out;
  std::optional<Vec> warm;
  for (double lam : lambdas) {
    try {
      const SplashFit f = warm ? solver.fit(lam, alpha, s_.solver, std::span<const double>(*warm))
                               : solver.fit(lam, alpha, s_.solver);
      warm = f.c_hat;
      out.emplace_back(to_result(f, n, resolved_bandwidth(n)));
    } catch (const SplashError&) {
      out.emplace_back(std::nullopt);
    }
  }
  return out;
}

EstimateResult SplashEstimator::fit(const Panel& p, double lambda, double alpha) const {
  const YwSystem sys = system(p);
  const SplashFit f = SglSolver(sys).fit(lambda, alpha, s_.solver);
  return to_result(f, p.n_units(), resolved_bandwidth(p.n_units()));
}

// --- PVAR -------------------------------------------------------------------

std::unique_ptr<Estimator> PvarEstimator::clone() const {
  return std::make_unique<PvarEstimator>(tol_);
}

double PvarEstimator::lambda_max(const Panel& train, double) const {
  return PvarProblem(train).lambda_max();
}

std::vector<std::optional<EstimateResult>> PvarEstimator::fit_path(
    const Panel& train, double, std::span<const double> lambdas) const {
  const PvarProblem prob(train);
  std::vector<std::optional<EstimateResult>> out;
  std::optional<Mat> warm;
  for (double lam : lambdas) {
    try {
      PvarFit f = prob.fit(lam, tol_, 100'000, warm ? &*warm : nullptr);
      warm = f.c;
      EstimateResult r;
      r.transition = std::move(f.c);
      r.intercept.assign(train.n_units(), 0.0);
      r.lambda = lam;
      out.emplace_back(std::move(r));
    } catch (const SplashError&) {
      out.emplace_back(std::nullopt);
    }
  }
  return out;
}

EstimateResult PvarEstimator::fit(const Panel& p, double lambda, double) const {
  EstimateResult r;
  r.transition = PvarProblem(p).fit(lambda, tol_).c;
  r.intercept.assign(p.n_units(), 0.0);
  r.lambda = lambda;
  return r;
}

// --- GMWY / CONST -----------------------------------------------------------

std::unique_ptr<Estimator> GmwyEstimator::clone() const {
  return std::make_unique<GmwyEstimator>(label_, support_);
}

EstimateResult GmwyEstimator::fit(const Panel& p, double, double) const {
  GmwyFit g = gmwy_fit(p, support_);
  EstimateResult r;
  r.transition = transition_matrix(g.a, g.b);
  r.intercept.assign(p.n_units(), 0.0);
  r.a_hat = std::move(g.a);
  r.b_hat = std::move(g.b);
  return r;
}

std::unique_ptr<Estimator> ConstEstimator::clone() const {
  return std::make_unique<ConstEstimator>();
}

EstimateResult ConstEstimator::fit(const Panel& p, double, double) const {
  EstimateResult r;
  r.transition = Mat(p.n_units(), p.n_units());
  r.intercept = const_forecast(p);
  return r;
}

// --- tuning -----------------------------------------------------------------

CvChoice ts_cross_validate(const Panel& p, const CvGrid& grid, const Estimator& est) {
  grid.validate();
  if (!est.tunable()) throw InvalidArgument("ts_cross_validate: " + est.name() + " has no tuning parameters");
  const std::size_t t = p.n_time();
  const auto n_train =
      static_cast<std::size_t>(std::ceil(grid.train_frac * static_cast<double>(t) - 1e-9));
  if (n_train < 2 || n_train + 2 > t)
    throw InvalidArgument("ts_cross_validate: both segments need at least 2 time points (T = " +
                          std::to_string(t) + ")");
  const Panel train = p.slice(0, n_train);

  CvChoice best;
  best.score = kInf;
  bool found = false;
  for (double alpha : est.alphas(grid)) {
    std::vector<double> lambdas = grid.lambdas;
    double lmax = 0.0;
    const bool automatic = lambdas.empty();
    if (automatic) {
      lmax = est.lambda_max(train, alpha);
      lambdas = lambda_path(lmax, grid.n_lambda, grid.lambda_ratio);
    }
    const auto fits = est.fit_path(train, alpha, lambdas);
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
      const double score = fits[k] ? validation_mse(p, n_train, *fits[k]) : kInf;
      if (!std::isfinite(score)) continue;
      const double lam = lambdas[k];
      const bool better =
          !found || score < best.score ||
          (score == best.score && (lam > best.lambda || (lam == best.lambda && alpha < best.alpha)));
      if (!better) continue;
      found = true;
      best.lambda = lam;
      best.alpha = alpha;
      best.score = score;
      best.ratio = automatic && lmax > 0.0 ? std::optional<double>(lam / lmax) : std::nullopt;
      if (automatic && lmax == 0.0) best.ratio = 1.0;
    }
  }
  if (!found) throw SplashError("ts_cross_validate: no grid point of " + est.name() + " could be fitted");
  return best;
}

TunedFit tune_and_fit(const Panel& p, const CvGrid& grid, const Estimator& est, RngSpec rng) {
  const std::unique_ptr<Estimator> adapted = est.adapt(p, rng);
  TunedFit out;
  if (!adapted->tunable()) {
    out.result = adapted->fit(p, 0.0, 0.0);
    return out;
  }
  const CvChoice choice = ts_cross_validate(p, grid, *adapted);
  const double lambda =
      choice.ratio ? *choice.ratio * adapted->lambda_max(p, choice.alpha) : choice.lambda;
  out.result = adapted->fit(p, lambda, choice.alpha);
  out.choice = choice;
  return out;
}

// --- metrics ----------------------------------------------------------------

double rmsfe_from_forecasts(std::span<const Vec> forecasts, std::span<const RmsfeCase> truths) {
  if (forecasts.size() != truths.size() || truths.empty())
    throw InvalidArgument("rmsfe: need one forecast per replication and at least one replication");
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < truths.size(); ++j) {
    const RmsfeCase& tc = truths[j];
    const Vec oracle = matvec(tc.c, tc.y_t);
    if (forecasts[j].size() != tc.y_next.size())
      throw InvalidArgument("rmsfe: forecast dimension mismatch");
    for (std::size_t i = 0; i < tc.y_next.size(); ++i) {
      const double e = tc.y_next[i] - forecasts[j][i];
      const double e0 = tc.y_next[i] - oracle[i];
      num += e * e;
      den += e0 * e0;
    }
  }
  if (den == 0.0) return num == 0.0 ? 1.0 : kInf;
  return num / den;
}

double rmsfe(std::span<const Mat> c_hats, std::span<const RmsfeCase> truths) {
  if (c_hats.size() != truths.size())
    throw InvalidArgument("rmsfe: need one estimate per replication");
  std::vector<Vec> f;
  f.reserve(c_hats.size());
  for (std::size_t j = 0; j < c_hats.size(); ++j) f.push_back(matvec(c_hats[j], truths[j].y_t));
  return rmsfe_from_forecasts(f, truths);
}

double estimation_error(std::span<const Mat> est, const Mat& truth) {
  if (est.empty()) throw InvalidArgument("estimation_error: no estimates");
  double s = 0.0;
  for (const Mat& m : est) s += spectral_norm(m - truth);
  return s / static_cast<double>(est.size());
}

const char* to_string(Loss l) { return l == Loss::Squared ? "squared" : "absolute"; }

Loss parse_loss(const std::string& s) {
  if (s == "squared") return Loss::Squared;
  if (s == "absolute") return Loss::Absolute;
  throw InvalidArgument("unknown loss '" + s + "' (expected squared|absolute)");
}

double apply_loss(Loss l, double e) { return l == Loss::Squared ? e * e : std::abs(e); }

DmResult dm_test(std::span<const double> e1, std::span<const double> e2, Loss loss) {
  if (e1.size() != e2.size()) throw InvalidArgument("dm_test: series lengths differ");
  const std::size_t n = e1.size();
  if (n < 10) throw InvalidArgument("dm_test: need at least 10 observations");
  if (!all_finite(e1) || !all_finite(e2)) throw InvalidArgument("dm_test: non-finite errors");
  Vec d(n);
  double mean = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    d[t] = apply_loss(loss, e1[t]) - apply_loss(loss, e2[t]);
    mean += d[t];
  }
  mean /= static_cast<double>(n);
  const auto lag = static_cast<std::size_t>(std::floor(std::cbrt(static_cast<double>(n))));
  double lrv = 0.0;
  for (std::size_t k = 0; k <= lag; ++k) {
    double g = 0.0;
    for (std::size_t t = k; t < n; ++t) g += (d[t] - mean) * (d[t - k] - mean);
    g /= static_cast<double>(n);
    lrv += k == 0 ? g : 2.0 * (1.0 - static_cast<double>(k) / static_cast<double>(lag + 1)) * g;
  }
  DmResult r;
  if (!(lrv > 0.0)) {
    if (mean == 0.0) return r;
    r.stat = mean > 0.0 ? kInf : -kInf;
    r.p_value = 0.0;
    return r;
  }
  r.stat = mean / std::sqrt(lrv / static_cast<double>(n));
  r.p_value = std::erfc(std::abs(r.stat) / std::sqrt(2.0));
  return r;
}

// --- rolling windows --------------------------------------------------------

ForecastRecord rolling_windows(const Panel& p, double window_frac, const Estimator& est,
                               const CvGrid& grid, RngSpec rng) {
  const auto start = std::chrono::steady_clock::now();
  if (!(window_frac > 0.0 && window_frac <= 1.0))
    throw InvalidArgument("rolling_windows: window_frac must lie in (0, 1]");
  const std::size_t t = p.n_time();
  const std::size_t n = p.n_units();
  const std::size_t len = rolling_window_length(t, window_frac);
  if (len < 3) throw InvalidArgument("rolling_windows: window length must be at least 3");
  if (len >= t)
    throw InvalidArgument("rolling_windows: window length " + std::to_string(len) +
                          " leaves nothing to forecast in a panel of " + std::to_string(t));
  require_finite(p.values, "rolling_windows");
  const std::size_t n_win = t - len;

  ForecastRecord rec;
  rec.method = est.name();
  rec.window_length = len;
  rec.errors = Mat(n_win, n, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> failure(n_win);

  const auto windows = static_cast<std::ptrdiff_t>(n_win);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t ww = 0; ww < windows; ++ww) {
    const auto w = static_cast<std::size_t>(ww);
    try {
      Panel window = p.slice(w, w + len);
      const Vec means = const_forecast(window);
      for (std::size_t i = 0; i < n; ++i)
        for (double& v : window.values.row(i)) v -= means[i];
      const TunedFit tf = tune_and_fit(window, grid, est, rng.substream(w));
      const Vec f = forecast(tf.result, window.column(len - 1));
      for (std::size_t i = 0; i < n; ++i) rec.errors(w, i) = p.values(i, w + len) - (f[i] + means[i]);
    } catch (const SplashError& e) {
      failure[w] = e.what();
      for (std::size_t i = 0; i < n; ++i) rec.errors(w, i) = std::numeric_limits<double>::quiet_NaN();
    }
  }
  for (std::size_t w = 0; w < n_win; ++w) {
    if (failure[w].empty()) continue;
    rec.missing_windows.push_back(w);
    rec.failures.push_back(std::move(failure[w]));
  }
  rec.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

std::vector<ScoreRow> score_table(std::span<const ForecastRecord> records,
                                  const ForecastRecord& benchmark, Loss loss) {
  const std::size_t n_win = benchmark.n_windows();
  const std::size_t n = benchmark.errors.cols();
  std::vector<ScoreRow> rows;
  for (const ForecastRecord& rec : records) {
    if (rec.n_windows() != n_win || rec.errors.cols() != n)
      throw InvalidArgument("score_table: record '" + rec.method +
                            "' does not match the benchmark's shape");
    std::vector<std::size_t> common;
    for (std::size_t w = 0; w < n_win; ++w) {
      bool ok = true;
      for (std::size_t i = 0; i < n && ok; ++i)
        ok = std::isfinite(rec.errors(w, i)) && std::isfinite(benchmark.errors(w, i));
      if (ok) common.push_back(w);
    }
    ScoreRow row;
    row.method = rec.method;
    row.loss = loss;
    row.n_units = n;
    row.n_windows = common.size();
    double num = 0.0, den = 0.0;
    Vec e1(common.size()), e2(common.size());
    for (std::size_t i = 0; i < n && !common.empty(); ++i) {
      double m1 = 0.0, m2 = 0.0;
      for (std::size_t k = 0; k < common.size(); ++k) {
        e1[k] = rec.errors(common[k], i);
        e2[k] = benchmark.errors(common[k], i);
        m1 += apply_loss(loss, e1[k]);
        m2 += apply_loss(loss, e2[k]);
      }
      m1 /= static_cast<double>(common.size());
      m2 /= static_cast<double>(common.size());
      num += m1;
      den += m2;
      if (m1 < m2) {
        ++row.wins;
        if (common.size() >= 10) {
          const DmResult dm = dm_test(e1, e2, loss);
          if (dm.stat < 0.0 && dm.p_value < 0.05) ++row.significant_wins;
        }
      }
    }
    row.relative_loss = den > 0.0 ? num / den : (num == 0.0 ? 1.0 : kInf);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace splash
