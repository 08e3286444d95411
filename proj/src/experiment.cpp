#include "splash/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "splash/benchmarks.hpp"
#include "splash/simulate.hpp"

namespace splash {

namespace {

// Stream layout per replication: model draw, innovations, tuning.
constexpr std::uint64_t kStreamsPerRep = 4;

struct MethodOutcome {
  Vec forecast;
  std::optional<Mat> a_hat;
  std::optional<Mat> b_hat;
};

struct RepOutcome {
  bool ok = false;
  std::string error;
  RmsfeCase truth;
  Mat a;
  Mat b;
  std::vector<MethodOutcome> methods;
};

}  // namespace

const char* to_string(Design d) { return d == Design::A ? "A" : "B"; }

Design parse_design(const std::string& s) {
  if (s == "A" || s == "a") return Design::A;
  if (s == "B" || s == "b") return Design::B;
  throw InvalidArgument("unknown design '" + s + "' (expected A|B)");
}

StModel experiment_model(const ExperimentConfig& cfg, std::size_t rep) {
  if (cfg.design == Design::B) return gen_design_b(cfg.m, cfg.interaction, cfg.resolved_b_diag());
  const RngSpec spec{cfg.seed, rep * kStreamsPerRep};
  return gen_design_a(cfg.n, cfg.k0, spec);
}

std::unique_ptr<Estimator> make_estimator(const std::string& id, const ExperimentConfig& cfg,
                                          const StModel& truth) {
  SplashSettings s = cfg.splash;
  if (id == "splash0") {
    s.alpha = 0.0;
    return std::make_unique<SplashEstimator>(s);
  }
  if (id == "splash1") {
    s.alpha = 1.0;
    return std::make_unique<SplashEstimator>(s);
  }
  if (id == "splash_alpha") {
    s.alpha.reset();
    return std::make_unique<SplashEstimator>(s);
  }
  if (id == "gmwy_k0")
    return std::make_unique<GmwyEstimator>("GMWY(k0)",
                                           SupportSet::banded(truth.n(), cfg.true_bandwidth()));
  if (id == "gmwy_cs")
    return std::make_unique<GmwyEstimator>("GMWY(cS)", SupportSet::from_model(truth));
  if (id == "pvar") return std::make_unique<PvarEstimator>();
  if (id == "const") return std::make_unique<ConstEstimator>();
  throw InvalidArgument("unknown method '" + id + "'");
}

ReplicationResult run_replication(const ExperimentConfig& cfg) {
  if (cfg.reps == 0) throw InvalidArgument("replicate: reps must be positive");
  if (cfg.t < 10) throw InvalidArgument("replicate: T must be at least 10");
  if (cfg.methods.empty()) throw InvalidArgument("replicate: no methods configured");
  cfg.grid.validate();
  const StModel probe = experiment_model(cfg, 0);
  for (const auto& id : cfg.methods) make_estimator(id, cfg, probe);

  std::vector<RepOutcome> reps(cfg.reps);
  const auto total = static_cast<std::ptrdiff_t>(cfg.reps);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t rr = 0; rr < total; ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    RepOutcome& out = reps[r];
    try {
      const StModel model = experiment_model(cfg, r);
      const std::uint64_t base = r * kStreamsPerRep;
      const Panel full = simulate_var(model, cfg.t + 1, cfg.burn_in, RngSpec{cfg.seed, base + 1});
      const Panel panel = full.slice(0, cfg.t);
      out.truth = RmsfeCase{reduced_form(model).c, full.column(cfg.t - 1), full.column(cfg.t)};
      out.a = model.a;
      out.b = model.b;
      for (const auto& id : cfg.methods) {
        const auto est = make_estimator(id, cfg, model);
        const TunedFit tf = tune_and_fit(panel, cfg.grid, *est, RngSpec{cfg.seed, base + 2});
        out.methods.push_back({forecast(tf.result, out.truth.y_t), tf.result.a_hat, tf.result.b_hat});
      }
      out.ok = true;
    } catch (const SplashError& e) {
      out.error = e.what();
      out.methods.clear();
    }
  }

  ReplicationResult res;
  res.reps_requested = cfg.reps;
  std::vector<const RepOutcome*> used;
  for (std::size_t r = 0; r < cfg.reps; ++r) {
    if (reps[r].ok) {
      used.push_back(&reps[r]);
    } else {
      res.excluded_reps.push_back(r);
      res.exclusion_reasons.push_back(reps[r].error);
    }
  }
  res.reps_used = used.size();
  if (used.empty()) {
    for (std::size_t k = 0; k < cfg.methods.size(); ++k)
      res.methods.push_back({cfg.methods[k], make_estimator(cfg.methods[k], cfg, probe)->name(),
                             std::nan(""), std::nullopt, std::nullopt, std::nullopt, {}});
    return res;
  }

  const std::size_t n = cfg.n_units();
  std::vector<RmsfeCase> truths;
  for (const RepOutcome* r : used) truths.push_back(r->truth);
  for (std::size_t k = 0; k < cfg.methods.size(); ++k) {
    MethodSummary ms;
    ms.id = cfg.methods[k];
    ms.label = make_estimator(ms.id, cfg, probe)->name();
    std::vector<Vec> forecasts;
    for (const RepOutcome* r : used) forecasts.push_back(r->methods[k].forecast);
    ms.rmsfe = rmsfe_from_forecasts(forecasts, truths);

    if (used.front()->methods[k].a_hat) {
      double ea = 0.0, eb = 0.0;
      Mat mean_abs(n, n);
      const std::size_t cap = std::max<std::size_t>(1, n - 1);
      std::vector<double> sel(cap, 0.0);
      for (const RepOutcome* r : used) {
        const Mat& ah = *r->methods[k].a_hat;
        const Mat& bh = *r->methods[k].b_hat;
        ea += spectral_norm(ah - r->a);
        eb += spectral_norm(bh - r->b);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) mean_abs(i, j) += std::abs(ah(i, j));
        std::vector<char> nonzero(cap, 0);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j)
            if (i != j && ah(i, j) != 0.0) nonzero[(i > j ? i - j : j - i) - 1] = 1;
        for (std::size_t d = 0; d < cap; ++d) sel[d] += nonzero[d];
      }
      const double inv = 1.0 / static_cast<double>(used.size());
      ms.ee_a = ea * inv;
      ms.ee_b = eb * inv;
      ms.mean_abs_a = inv * mean_abs;
      for (double& v : sel) v *= inv;
      ms.a_diagonal_selection = std::move(sel);
    }
    res.methods.push_back(std::move(ms));
  }
  return res;
}

}  // namespace splash
