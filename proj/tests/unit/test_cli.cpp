#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "splash/cli/commands.hpp"
#include "splash/cli/panel_io.hpp"
#include "splash/cli/run_config.hpp"
#include "splash/simulate.hpp"

using namespace splash;
using namespace splash::cli;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("splash_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

Panel parse(const std::string& text, bool interpolate = false) {
  std::istringstream in(text);
  return parse_panel_csv(in, PanelReadOptions{interpolate});
}

template <class F>
std::string usage_field(F f) {
  try {
    f();
  } catch (const UsageError& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("config text round-trips through its canonical form") {
  const RunConfig def;
  CHECK(parse_config(emit_config(def)) == def);

  const std::string text =
      "# comment line\n"
      "design = A\n"
      "n = 40   # trailing comment\n"
      "k0 = 2\n"
      "h-grid = 3, 5,7\n"
      "alpha = 0.50\n"
      "lambdas = 2, 1.5e-1\n"
      "loss = absolute\n"
      "methods = splash0,pvar\n"
      "bandwidth_mode = fixed\n"
      "bandwidth = 6\n"
      "interpolate = yes\n";
  const RunConfig cfg = parse_config(text);
  CHECK(cfg.design == Design::A);
  CHECK(cfg.n == 40);
  CHECK(cfg.h_grid == std::vector<std::size_t>{3, 5, 7});
  CHECK(*cfg.alpha == 0.5);
  CHECK(cfg.lambdas == std::vector<double>{2.0, 0.15});
  CHECK(cfg.interpolate);
  const std::string canon = emit_config(cfg);
  CHECK(canon.find("alpha = 0.5\n") != std::string::npos);
  CHECK(canon.find("h_grid = 3,5,7\n") != std::string::npos);
  CHECK(canon.find("lambdas = 2,0.15\n") != std::string::npos);
  CHECK(canon.find("b_diag = auto\n") != std::string::npos);
  CHECK(emit_config(parse_config(canon)) == canon);
  CHECK(parse_config(canon) == cfg);

  // every key appears exactly once, in config_keys() order
  std::istringstream lines(canon);
  std::string line;
  std::size_t k = 0;
  while (std::getline(lines, line)) {
    REQUIRE(k < config_keys().size());
    CHECK(line.rfind(config_keys()[k] + " = ", 0) == 0);
    ++k;
  }
  CHECK(k == config_keys().size());

  RunConfig reset = cfg;
  set_field(reset, "alpha", "auto");
  CHECK_FALSE(reset.alpha.has_value());
  CHECK(get_field(reset, "alpha") == "auto");
}

TEST_CASE("configuration errors name the offending field") {
  RunConfig cfg;
  CHECK(usage_field([&] { set_field(cfg, "t", "ten"); }) == "t");
  CHECK(usage_field([&] { set_field(cfg, "t", "-5"); }) == "t");
  CHECK(usage_field([&] { set_field(cfg, "tol", "inf"); }) == "tol");
  CHECK(usage_field([&] { set_field(cfg, "design", "C"); }) == "design");
  CHECK(usage_field([&] { set_field(cfg, "loss", "huber"); }) == "loss");
  CHECK(usage_field([&] { set_field(cfg, "demean", "maybe"); }) == "demean");
  CHECK(usage_field([&] { set_field(cfg, "no_such_key", "1"); }) == "no_such_key");
  CHECK(usage_field([&] { parse_config("just words\n"); }) == "line 1");
  CHECK(usage_field([&] { load_config_file("/nonexistent/cfg.txt"); }) == "config");

  RunConfig r;
  r.t = 5;
  CHECK(usage_field([&] { resolve(r, Command::Replicate); }) == "t");
  r = RunConfig{};
  r.methods = {"splash0", "lasso"};
  CHECK(usage_field([&] { resolve(r, Command::Replicate); }) == "methods");
  r = RunConfig{};
  r.m = 4;  // banded GMWY would need 17 coefficients per equation
  CHECK(usage_field([&] { resolve(r, Command::Replicate); }) == "methods");
  r.methods = {"splash0", "gmwy_cs"};
  CHECK_NOTHROW(resolve(r, Command::Replicate));
  r = RunConfig{};
  CHECK(usage_field([&] { resolve(r, Command::Estimate); }) == "panel");
  r.panel = "x.csv";
  r.bandwidth_mode = BandwidthMode::Fixed;
  CHECK(usage_field([&] { resolve(r, Command::Estimate); }) == "bandwidth");
  r.bandwidth = 3;
  r.alphas = {0.5, 1.5};
  CHECK(usage_field([&] { resolve(r, Command::Estimate); }) == "alphas");
  r.alphas = {0.5};
  r.lambdas = {1.0, 2.0};
  CHECK(usage_field([&] { resolve(r, Command::Estimate); }) == "lambdas");
  r = RunConfig{};
  r.design = Design::A;
  r.n = 12;
  r.k0 = 3;
  CHECK(usage_field([&] { resolve(r, Command::Simulate); }) == "k0");
  r = RunConfig{};
  r.panel = "x.csv";
  r.window_frac = 0.0;
  CHECK(usage_field([&] { resolve(r, Command::ForecastEval); }) == "window_frac");

  const RunConfig seven = [] {
    RunConfig c;
    c.m = 7;
    return resolve(c, Command::Simulate);
  }();
  CHECK(*seven.b_diag == 0.23);
  CHECK(resolve(RunConfig{}, Command::Simulate).b_diag == 0.25);
  CHECK(resolve(RunConfig{}, Command::Replicate).methods == default_methods(Command::Replicate));
}

TEST_CASE("panel CSV: layout, quoting, round trip") {
  const Panel p = parse("a,\"b, c\",d\n1,2,3\n4,5,6\n\n");
  CHECK(p.n_units() == 3);
  CHECK(p.n_time() == 2);
  CHECK(p.unit_labels == std::vector<std::string>{"a", "b, c", "d"});
  CHECK(p.values(1, 0) == 2.0);
  CHECK(p.values(2, 1) == 6.0);

  Rng rng({90, 0});
  Mat v(3, 7);
  for (double& x : v.data()) x = rng.normal() * 1e3;
  const Panel q(v, {"x", "y,z", "w"});
  std::ostringstream out;
  write_panel_csv(out, q);
  const Panel back = parse(out.str());
  CHECK(back.values == q.values);
  CHECK(back.unit_labels == q.unit_labels);
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(std::nan("")) == "NaN");
}

TEST_CASE("panel CSV: malformed input reports row and column") {
  try {
    parse("a,b\n1,2\n3\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);
  }
  try {
    parse("a,b\n1,2\n3,abc\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);
    CHECK(e.col() == 2);
    CHECK(std::string(e.what()).find("row 3, column 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("a,b\n1,2,3\n"), ParseError);
  CHECK_THROWS_AS(read_panel_csv("/nonexistent/panel.csv"), SplashError);
}

TEST_CASE("panel CSV: missing values and interpolation") {
  const std::string text = "a,b\n1,NA\n,4\n3,\n5,8\n";
  try {
    parse(text);
    FAIL("expected MissingValuesError");
  } catch (const MissingValuesError& e) {
    REQUIRE(e.cells().size() == 3);
    CHECK(e.cells()[0].row == 2);
    CHECK(e.cells()[0].col == 2);
    CHECK(e.cells()[1].row == 3);
    CHECK(e.cells()[1].col == 1);
    CHECK(std::string(e.what()).find("--interpolate") != std::string::npos);
  }
  const Panel p = parse(text, true);
  CHECK(p.values(0, 1) == doctest::Approx(2.0));  // between 1 and 3
  CHECK(p.values(1, 0) == 4.0);                   // leading gap: nearest
  CHECK(p.values(1, 2) == doctest::Approx(6.0));  // between 4 and 8
  CHECK_THROWS_AS(parse("a,b\n1,nan\n2,NaN\n", true), SplashError);
}

TEST_CASE("simulate: deterministic files, usage errors") {
  RunConfig cfg;
  cfg.m = 3;
  cfg.t = 50;
  cfg.burn_in = 20;
  cfg.seed = 5;
  const fs::path d1 = scratch("sim1"), d2 = scratch("sim2");
  const CommandResult r1 = cmd_simulate(cfg, d1);
  cmd_simulate(cfg, d2);
  REQUIRE(r1.files.size() == 2);
  for (const auto& f : r1.files) CHECK(slurp(f) == slurp(d2 / f.filename()));

  const Panel p = read_panel_csv(d1 / "panel.csv");
  CHECK(p.n_units() == 9);
  CHECK(p.n_time() == 50);
  CHECK(p.unit_labels[4] == "r2c2");
  const Panel direct = simulate_var(gen_design_b(3), 50, 20, {5, 1});
  CHECK(p.values == direct.values);

  const json truth = read_json(d1 / "truth.json");
  CHECK(truth["schema_version"] == kSchemaVersion);
  CHECK(truth["command"] == "simulate");
  CHECK(truth["config"]["m"] == "3");
  CHECK(truth["model"]["a"][0][1] == 0.2);

  cfg.t = 1;
  CHECK(usage_field([&] { cmd_simulate(cfg, d1); }) == "t");
}

TEST_CASE("estimate: zero panel gives a zero fit; outputs carry the schema") {
  const fs::path dir = scratch("est");
  const Panel zero(Mat(8, 40));
  write_panel_csv(dir / "zero.csv", zero);
  RunConfig cfg;
  cfg.panel = (dir / "zero.csv").string();
  cfg.bandwidth_mode = BandwidthMode::Fixed;
  cfg.bandwidth = 3;
  cfg.lambda = 1.0;
  cfg.alpha = 0.5;
  cmd_estimate(cfg, dir / "out");
  const json fit = read_json(dir / "out" / "fit.json");
  CHECK(fit["lambda"] == 1.0);
  for (const auto& v : fit["c_hat"]) CHECK(v == 0.0);
  CHECK(fit["selected_diagonals"]["A"].empty());
  CHECK(fit["cap"] == 2);

  cfg.lambda.reset();
  cfg.alpha.reset();
  cfg.lambda = 1.0;
  CHECK(usage_field([&] { cmd_estimate(cfg, dir / "out"); }) == "alpha");

  // cross-validated run on simulated data
  const Panel sim = simulate_var(gen_design_b(3), 200, 100, {91, 0});
  write_panel_csv(dir / "sim.csv", sim);
  RunConfig cv;
  cv.panel = (dir / "sim.csv").string();
  cv.n_lambda = 6;
  cv.alphas = {0.0, 1.0};
  cmd_estimate(cv, dir / "cv");
  const json f2 = read_json(dir / "cv" / "fit.json");
  CHECK(f2["cross_validation"]["train_frac"] == 0.8);
  CHECK(f2["groups"].size() == 2 * 2 + 1);  // cap 2: A 1..2, B 0..2
  CHECK(f2["transition"].size() == 9);
  const std::string groups = slurp(dir / "cv" / "groups.csv");
  CHECK(groups.rfind("matrix,diagonal,size,l2_norm,mean_abs,nonzero\n", 0) == 0);

  Mat small(3, 10);
  write_panel_csv(dir / "small.csv", Panel(small));
  cv.panel = (dir / "small.csv").string();
  CHECK(usage_field([&] { cmd_estimate(cv, dir / "cv"); }) == "panel");
}

TEST_CASE("replicate: tiny run has the documented shape") {
  const fs::path dir = scratch("rep");
  RunConfig cfg;
  cfg.m = 2;
  cfg.t = 40;
  cfg.burn_in = 20;
  cfg.reps = 2;
  cfg.n_lambda = 4;
  cfg.methods = {"splash0", "pvar", "const"};
  cmd_replicate(cfg, dir);
  std::istringstream csv(slurp(dir / "replicate.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "design,n_units,t,metric,method,value");
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    CHECK(line.rfind("B,4,40,", 0) == 0);
    ++rows;
  }
  CHECK(rows == 3 + 2);  // RMSFE for each method, EE_A and EE_B for SPLASH only
  const json j = read_json(dir / "replicate.json");
  CHECK(j["reps_requested"] == 2);
  CHECK(j["methods"].size() == 3);
}

TEST_CASE("forecast-eval: single window and white-noise CONST") {
  const fs::path dir = scratch("fe");
  const Panel small = simulate_var(gen_design_b(2), 10, 20, {92, 0});
  write_panel_csv(dir / "small.csv", small);
  RunConfig cfg;
  cfg.panel = (dir / "small.csv").string();
  cfg.window_frac = 0.9;
  cfg.methods = {"const", "gmwy"};
  cfg.n_lambda = 4;
  cmd_forecast_eval(cfg, dir / "one");
  const json one = read_json(dir / "one" / "forecast_eval.json");
  CHECK(one["n_windows"] == 1);
  for (const auto& row : one["table"]) CHECK(row["significant_wins"] == 0);

  cfg.window_frac = 0.95;  // length 10: nothing left to forecast
  CHECK(usage_field([&] { cmd_forecast_eval(cfg, dir / "one"); }) == "window_frac");

  StModel noise{Mat(4, 4), Mat(4, 4), Mat::identity(4), 0, 0};
  write_panel_csv(dir / "noise.csv", simulate_var(noise, 200, 0, {92, 1}));
  cfg.panel = (dir / "noise.csv").string();
  cfg.window_frac = 0.8;
  cfg.methods = {"const"};
  cfg.loss = {Loss::Squared};
  cmd_forecast_eval(cfg, dir / "noise");
  const json j = read_json(dir / "noise" / "forecast_eval.json");
  REQUIRE(j["table"].size() == 1);
  CHECK(j["n_windows"] == 40);
  const double rel = j["table"][0]["relative_loss"];
  CHECK(rel > 0.85);
  CHECK(rel < 1.15);
  const std::string csv = slurp(dir / "noise" / "forecast_eval.csv");
  CHECK(csv.rfind("method,loss,n_units,n_windows,wins,significant_wins,relative_loss\n", 0) == 0);
}
