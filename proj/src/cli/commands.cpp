#include "splash/cli/commands.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "splash/autocov.hpp"
#include "splash/benchmarks.hpp"
#include "splash/cli/panel_io.hpp"
#include "splash/model.hpp"
#include "splash/simulate.hpp"
#include "splash/solver.hpp"

namespace splash::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Stream 1 drives innovations, as in replication 0 of the Monte Carlo;
// stream 2 drives bandwidth selection; method k of forecast-eval uses 16 + k.
constexpr std::uint64_t kInnovationStream = 1;
constexpr std::uint64_t kTuningStream = 2;
constexpr std::uint64_t kForecastStreamBase = 16;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json mat_json(const Mat& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (double v : m.row(i)) r.push_back(number(v));
    rows.push_back(std::move(r));
  }
  return rows;
}

json vec_json(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

json config_json(const RunConfig& cfg) {
  json c = json::object();
  for (const auto& key : config_keys()) c[key] = get_field(cfg, key);
  return c;
}

json header(Command c, const RunConfig& cfg) {
  json j = json::object();
  j["schema_version"] = kSchemaVersion;
  j["command"] = to_string(c);
  j["config"] = config_json(cfg);
  return j;
}

fs::path prepare(const fs::path& out_dir, const std::string& name) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw SplashError("cannot create output directory '" + out_dir.string() + "'");
  return out_dir / name;
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw SplashError("cannot write '" + file.string() + "'");
  out << text;
}

void write_json(const fs::path& file, const json& j) { write_text(file, j.dump(2) + "\n"); }

std::vector<std::string> grid_labels(std::size_t m) {
  std::vector<std::string> out;
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < m; ++c)
      out.push_back("r" + std::to_string(r + 1) + "c" + std::to_string(c + 1));
  return out;
}

Panel load_panel(const RunConfig& cfg) {
  PanelReadOptions opts;
  opts.interpolate = cfg.interpolate;
  return read_panel_csv(cfg.panel, opts);
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

}  // namespace

// --- simulate ---------------------------------------------------------------

CommandResult cmd_simulate(const RunConfig& raw, const fs::path& out_dir) {
  const RunConfig cfg = resolve(raw, Command::Simulate);
  const ExperimentConfig exp = to_experiment(cfg);
  const StModel model = experiment_model(exp, 0);
  Panel panel = simulate_var(model, cfg.t, cfg.burn_in, RngSpec{cfg.seed, kInnovationStream});
  if (cfg.design == Design::B) panel.unit_labels = grid_labels(cfg.m);

  const ReducedForm rf = reduced_form(model);
  json j = header(Command::Simulate, cfg);
  json mj = json::object();
  mj["design"] = to_string(cfg.design);
  mj["n_units"] = model.n();
  mj["bandwidth_k"] = model.bandwidth_k;
  mj["bandwidth_l0"] = model.bandwidth_l0;
  mj["unit_labels"] = panel.unit_labels;
  mj["a"] = mat_json(model.a);
  mj["b"] = mat_json(model.b);
  mj["sigma_eps"] = mat_json(model.sigma_eps);
  mj["c"] = mat_json(rf.c);
  mj["spectral_norm_c"] = spectral_norm(rf.c);
  j["model"] = std::move(mj);
  j["simulation"] = {{"t", cfg.t}, {"burn_in", cfg.burn_in}, {"seed", cfg.seed},
                     {"innovation_stream", kInnovationStream}};

  CommandResult res;
  res.files.push_back(prepare(out_dir, "panel.csv"));
  write_panel_csv(res.files.back(), panel);
  res.files.push_back(prepare(out_dir, "truth.json"));
  write_json(res.files.back(), j);
  res.summary = "simulated design " + std::string(to_string(cfg.design)) + ": N = " +
                std::to_string(model.n()) + ", T = " + std::to_string(cfg.t) +
                ", ||C||_2 = " + fixed(spectral_norm(rf.c)) + "\n";
  return res;
}

// --- estimate ---------------------------------------------------------------

CommandResult cmd_estimate(const RunConfig& raw, const fs::path& out_dir) {
  const RunConfig cfg = resolve(raw, Command::Estimate);
  if (cfg.lambda && !cfg.alpha)
    throw UsageError("alpha", "a fixed lambda needs a fixed alpha as well");
  Panel panel = load_panel(cfg);
  const std::size_t n = panel.n_units();
  if (n < 4) throw UsageError("panel", "SPLASH needs at least 4 units (floor(N/4) >= 1)");
  if (panel.n_time() < 3) throw UsageError("panel", "need at least 3 time points");

  Vec means(n, 0.0);
  if (cfg.demean) {
    means = const_forecast(panel);
    for (std::size_t i = 0; i < n; ++i)
      for (double& v : panel.values.row(i)) v -= means[i];
  }

  const SplashEstimator base(to_splash(cfg));
  const auto adapted_ptr = base.adapt(panel, RngSpec{cfg.seed, kTuningStream});
  const auto& est = dynamic_cast<const SplashEstimator&>(*adapted_ptr);
  const YwSystem sys = est.system(panel);
  const SglSolver solver(sys);

  json cv = nullptr;
  double lambda = 0.0, alpha = 0.0;
  if (cfg.lambda) {
    lambda = *cfg.lambda;
    alpha = *cfg.alpha;
  } else {
    const CvChoice choice = ts_cross_validate(panel, to_grid(cfg), est);
    alpha = choice.alpha;
    lambda = choice.ratio ? *choice.ratio * solver.lambda_max(alpha) : choice.lambda;
    cv = {{"train_frac", cfg.train_frac},
          {"lambda_train", choice.lambda},
          {"lambda_ratio", choice.ratio ? json(*choice.ratio) : json(nullptr)},
          {"alpha", choice.alpha},
          {"validation_mse", number(choice.score)}};
  }
  const SplashFit fit = solver.fit(lambda, alpha, to_splash(cfg).solver);
  const double lmax = solver.lambda_max(alpha);

  const GroupLayout& layout = sys.layout;
  json groups = json::array();
  std::vector<std::size_t> sel_a, sel_b;
  std::ostringstream csv;
  csv << "matrix,diagonal,size,l2_norm,mean_abs,nonzero\n";
  for (const Group& g : layout.groups) {
    double sq = 0.0, abs_sum = 0.0;
    for (std::size_t pos : g.members) {
      sq += fit.c_hat[pos] * fit.c_hat[pos];
      abs_sum += std::abs(fit.c_hat[pos]);
    }
    const bool nonzero = sq > 0.0;
    const char* mname = g.matrix == CoefMatrix::A ? "A" : "B";
    if (nonzero) (g.matrix == CoefMatrix::A ? sel_a : sel_b).push_back(g.diagonal);
    const double mean_abs = abs_sum / static_cast<double>(g.members.size());
    groups.push_back({{"matrix", mname},
                      {"diagonal", g.diagonal},
                      {"size", g.members.size()},
                      {"l2_norm", std::sqrt(sq)},
                      {"mean_abs", mean_abs},
                      {"nonzero", nonzero}});
    csv << mname << ',' << g.diagonal << ',' << g.members.size() << ','
        << format_double(std::sqrt(sq)) << ',' << format_double(mean_abs) << ','
        << (nonzero ? 1 : 0) << '\n';
  }

  json j = header(Command::Estimate, cfg);
  j["panel"] = {{"n_units", n}, {"n_time", panel.n_time()}, {"unit_labels", panel.unit_labels}};
  j["unit_means"] = vec_json(means);
  j["bandwidth"] = est.resolved_bandwidth(n);
  j["bandwidth_selected"] = cfg.bandwidth_mode == BandwidthMode::Bootstrap;
  j["cap"] = layout.cap;
  j["lambda"] = lambda;
  j["alpha"] = alpha;
  j["lambda_max"] = lmax;
  j["cross_validation"] = cv;
  j["diagnostics"] = {{"objective", fit.objective},
                      {"sweeps", fit.n_iter},
                      {"kkt_residual", fit.kkt_residual},
                      {"n_coefficients", layout.size()}};
  j["selected_diagonals"] = {{"A", sel_a}, {"B", sel_b}};
  j["groups"] = std::move(groups);
  j["c_hat"] = vec_json(fit.c_hat);
  j["a_hat"] = mat_json(fit.a_hat);
  j["b_hat"] = mat_json(fit.b_hat);
  j["transition"] = mat_json(transition_matrix(fit.a_hat, fit.b_hat));

  CommandResult res;
  res.files.push_back(prepare(out_dir, "fit.json"));
  write_json(res.files.back(), j);
  res.files.push_back(prepare(out_dir, "groups.csv"));
  write_text(res.files.back(), csv.str());
  std::ostringstream s;
  s << "SPLASH fit: N = " << n << ", h = " << est.resolved_bandwidth(n) << ", alpha = "
    << format_double(alpha) << ", lambda = " << format_double(lambda) << " ("
    << (lmax > 0.0 ? fixed(lambda / lmax, 6) : std::string("-")) << " x lambda_max)\n";
  s << "nonzero A diagonals:";
  for (auto k : sel_a) s << ' ' << k;
  s << "\nnonzero B diagonals:";
  for (auto k : sel_b) s << ' ' << k;
  s << '\n';
  res.summary = s.str();
  return res;
}

// --- replicate --------------------------------------------------------------

CommandResult cmd_replicate(const RunConfig& raw, const fs::path& out_dir) {
  const RunConfig cfg = resolve(raw, Command::Replicate);
  const ExperimentConfig exp = to_experiment(cfg);
  const ReplicationResult rr = run_replication(exp);
  const std::size_t n = exp.n_units();

  std::ostringstream csv;
  csv << "design,n_units,t,metric,method,value\n";
  auto row = [&](const char* metric, const MethodSummary& m, std::optional<double> v) {
    if (!v) return;
    csv << to_string(cfg.design) << ',' << n << ',' << cfg.t << ',' << metric << ',' << m.label
        << ',' << format_double(*v) << '\n';
  };
  for (const auto& m : rr.methods) row("RMSFE", m, m.rmsfe);
  for (const auto& m : rr.methods) row("EE_A", m, m.ee_a);
  for (const auto& m : rr.methods) row("EE_B", m, m.ee_b);

  json methods = json::array();
  for (const auto& m : rr.methods) {
    json mj = {{"id", m.id},
               {"label", m.label},
               {"rmsfe", number(m.rmsfe)},
               {"ee_a", m.ee_a ? number(*m.ee_a) : json(nullptr)},
               {"ee_b", m.ee_b ? number(*m.ee_b) : json(nullptr)}};
    if (m.mean_abs_a) {
      json diag_mean = json::array();
      for (std::size_t k = 1; k < n; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i + k < n; ++i)
          s += (*m.mean_abs_a)(i, i + k) + (*m.mean_abs_a)(i + k, i);
        diag_mean.push_back(s / static_cast<double>(2 * (n - k)));
      }
      mj["a_diagonal_mean_abs"] = std::move(diag_mean);
      mj["a_diagonal_selection"] = m.a_diagonal_selection;
    }
    methods.push_back(std::move(mj));
  }
  json excluded = json::array();
  for (std::size_t k = 0; k < rr.excluded_reps.size(); ++k)
    excluded.push_back({{"rep", rr.excluded_reps[k]}, {"reason", rr.exclusion_reasons[k]}});

  json j = header(Command::Replicate, cfg);
  j["reps_requested"] = rr.reps_requested;
  j["reps_used"] = rr.reps_used;
  j["excluded"] = std::move(excluded);
  j["methods"] = std::move(methods);

  CommandResult res;
  res.files.push_back(prepare(out_dir, "replicate.json"));
  write_json(res.files.back(), j);
  res.files.push_back(prepare(out_dir, "replicate.csv"));
  write_text(res.files.back(), csv.str());

  std::ostringstream s;
  s << "design " << to_string(cfg.design) << ", N = " << n << ", T = " << cfg.t << ", "
    << rr.reps_used << "/" << rr.reps_requested << " replications used\n";
  for (std::size_t k = 0; k < rr.excluded_reps.size(); ++k)
    s << "  excluded rep " << rr.excluded_reps[k] << ": " << rr.exclusion_reasons[k] << '\n';
  for (const auto& m : rr.methods) {
    s << "  " << m.label << ": RMSFE " << fixed(m.rmsfe, 3);
    if (m.ee_a) s << ", EE_A " << fixed(*m.ee_a, 3) << ", EE_B " << fixed(*m.ee_b, 3);
    s << '\n';
  }
  res.summary = s.str();
  return res;
}

// --- forecast-eval ----------------------------------------------------------

namespace {

std::unique_ptr<Estimator> forecast_estimator(const std::string& id, const RunConfig& cfg,
                                              std::size_t n) {
  SplashSettings s = to_splash(cfg);
  const std::size_t cap = cfg.cap ? cfg.cap : default_cap(n);
  if (id == "splash0" || id == "splash1" || id == "splash_alpha") {
    if (id == "splash0") s.alpha = 0.0;
    else if (id == "splash1") s.alpha = 1.0;
    else s.alpha.reset();
    return std::make_unique<SplashEstimator>(s);
  }
  if (id == "gmwy") return std::make_unique<GmwyEstimator>("GMWY", SupportSet::banded(n, cap));
  if (id == "pvar") return std::make_unique<PvarEstimator>(cfg.tol);
  if (id == "const") return std::make_unique<ConstEstimator>();
  throw UsageError("methods", "unknown method '" + id + "'");
}

}  // namespace

CommandResult cmd_forecast_eval(const RunConfig& raw, const fs::path& out_dir) {
  const RunConfig cfg = resolve(raw, Command::ForecastEval);
  const Panel panel = load_panel(cfg);
  const std::size_t n = panel.n_units();
  const std::size_t len = rolling_window_length(panel.n_time(), cfg.window_frac);
  if (len >= panel.n_time())
    throw UsageError("window_frac", "window length " + std::to_string(len) +
                                        " leaves no forecast in a panel of " +
                                        std::to_string(panel.n_time()) + " time points");
  if (len < 3) throw UsageError("window_frac", "window length must be at least 3");
  const CvGrid grid = to_grid(cfg);

  const PvarEstimator pvar(cfg.tol);
  const ForecastRecord bench =
      rolling_windows(panel, cfg.window_frac, pvar, grid, RngSpec{cfg.seed, kForecastStreamBase});
  std::vector<ForecastRecord> records;
  for (std::size_t k = 0; k < cfg.methods.size(); ++k) {
    const auto est = forecast_estimator(cfg.methods[k], cfg, n);
    records.push_back(rolling_windows(panel, cfg.window_frac, *est, grid,
                                      RngSpec{cfg.seed, kForecastStreamBase + 1 + k}));
  }

  std::ostringstream csv;
  csv << "method,loss,n_units,n_windows,wins,significant_wins,relative_loss\n";
  json table = json::array();
  std::ostringstream s;
  s << "rolling windows: length " << len << ", " << bench.n_windows()
    << " one-step forecasts, benchmark PVAR\n";
  for (Loss loss : cfg.loss) {
    for (const ScoreRow& r : score_table(records, bench, loss)) {
      csv << r.method << ',' << to_string(loss) << ',' << r.n_units << ',' << r.n_windows << ','
          << r.wins << ',' << r.significant_wins << ',' << format_double(r.relative_loss) << '\n';
      table.push_back({{"method", r.method},
                       {"loss", to_string(loss)},
                       {"n_units", r.n_units},
                       {"n_windows", r.n_windows},
                       {"wins", r.wins},
                       {"significant_wins", r.significant_wins},
                       {"relative_loss", number(r.relative_loss)}});
      s << "  " << r.method << " [" << to_string(loss) << "]: wins " << r.wins << "/" << r.n_units
        << ", significant " << r.significant_wins << ", relative loss "
        << fixed(r.relative_loss, 3) << '\n';
    }
  }
  json missing = json::array();
  auto add_missing = [&](const ForecastRecord& rec) {
    for (std::size_t k = 0; k < rec.missing_windows.size(); ++k)
      missing.push_back(
          {{"method", rec.method}, {"window", rec.missing_windows[k]}, {"reason", rec.failures[k]}});
  };
  add_missing(bench);
  for (const auto& rec : records) add_missing(rec);

  json j = header(Command::ForecastEval, cfg);
  j["panel"] = {{"n_units", n}, {"n_time", panel.n_time()}};
  j["window_length"] = len;
  j["n_windows"] = bench.n_windows();
  j["benchmark"] = bench.method;
  j["table"] = std::move(table);
  j["missing_windows"] = std::move(missing);

  CommandResult res;
  res.files.push_back(prepare(out_dir, "forecast_eval.json"));
  write_json(res.files.back(), j);
  res.files.push_back(prepare(out_dir, "forecast_eval.csv"));
  write_text(res.files.back(), csv.str());
  res.summary = s.str();
  return res;
}

}  // namespace splash::cli
