#include "splash/cli/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "splash/cli/panel_io.hpp"

namespace splash::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + v[k];
  return s;
}

bool is_auto(const std::string& s) { return s.empty() || s == "auto"; }

std::uint64_t to_u64(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw UsageError(key, "expected a non-negative integer, got '" + s + "'");
  return v;
}

std::size_t to_size(const std::string& key, const std::string& s) {
  return static_cast<std::size_t>(to_u64(key, s));
}

double to_real(const std::string& key, const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw UsageError(key, "expected a finite number, got '" + s + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw UsageError(key, "expected true|false, got '" + s + "'");
}

template <class T, class F>
std::vector<T> map_list(const std::string& s, F f) {
  std::vector<T> out;
  for (const auto& item : split_list(s)) out.push_back(f(item));
  return out;
}

template <class T, class F>
std::string list_text(const std::vector<T>& v, F f) {
  std::vector<std::string> items;
  for (const auto& x : v) items.push_back(f(x));
  return join(items);
}

std::string size_text(std::size_t v) { return std::to_string(v); }

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define SIZE_FIELD(name)                                                              \
  Field{#name, [](RunConfig& c, const std::string& v) { c.name = to_size(#name, v); }, \
        [](const RunConfig& c) { return std::to_string(c.name); }}
#define REAL_FIELD(name)                                                              \
  Field{#name, [](RunConfig& c, const std::string& v) { c.name = to_real(#name, v); }, \
        [](const RunConfig& c) { return format_double(c.name); }}
#define OPT_REAL_FIELD(name)                                                                 \
  Field{#name,                                                                              \
        [](RunConfig& c, const std::string& v) {                                            \
          c.name = is_auto(v) ? std::nullopt : std::optional<double>(to_real(#name, v));     \
        },                                                                                  \
        [](const RunConfig& c) { return c.name ? format_double(*c.name) : std::string("auto"); }}
#define BOOL_FIELD(name)                                                              \
  Field{#name, [](RunConfig& c, const std::string& v) { c.name = to_bool(#name, v); }, \
        [](const RunConfig& c) { return std::string(c.name ? "true" : "false"); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      Field{"design", [](RunConfig& c, const std::string& v) {
              try {
                c.design = parse_design(v);
              } catch (const InvalidArgument&) {
                throw UsageError("design", "expected A|B, got '" + v + "'");
              }
            },
            [](const RunConfig& c) { return std::string(to_string(c.design)); }},
      SIZE_FIELD(n),
      SIZE_FIELD(k0),
      SIZE_FIELD(m),
      REAL_FIELD(interaction),
      OPT_REAL_FIELD(b_diag),
      SIZE_FIELD(t),
      SIZE_FIELD(burn_in),
      SIZE_FIELD(reps),
      Field{"seed", [](RunConfig& c, const std::string& v) { c.seed = to_u64("seed", v); },
            [](const RunConfig& c) { return std::to_string(c.seed); }},
      Field{"bandwidth_mode",
            [](RunConfig& c, const std::string& v) {
              if (v == "bootstrap") c.bandwidth_mode = BandwidthMode::Bootstrap;
              else if (v == "fixed") c.bandwidth_mode = BandwidthMode::Fixed;
              else throw UsageError("bandwidth_mode", "expected fixed|bootstrap, got '" + v + "'");
            },
            [](const RunConfig& c) {
              return std::string(c.bandwidth_mode == BandwidthMode::Fixed ? "fixed" : "bootstrap");
            }},
      Field{"bandwidth",
            [](RunConfig& c, const std::string& v) {
              c.bandwidth = is_auto(v) ? std::nullopt
                                       : std::optional<std::size_t>(to_size("bandwidth", v));
            },
            [](const RunConfig& c) {
              return c.bandwidth ? std::to_string(*c.bandwidth) : std::string("auto");
            }},
      Field{"h_grid",
            [](RunConfig& c, const std::string& v) {
              c.h_grid = is_auto(v) ? std::vector<std::size_t>{}
                                    : map_list<std::size_t>(v, [](const std::string& s) {
                                        return to_size("h_grid", s);
                                      });
            },
            [](const RunConfig& c) {
              return c.h_grid.empty() ? std::string("auto") : list_text(c.h_grid, size_text);
            }},
      SIZE_FIELD(n_boot),
      SIZE_FIELD(block_len),
      SIZE_FIELD(cap),
      OPT_REAL_FIELD(alpha),
      OPT_REAL_FIELD(lambda),
      REAL_FIELD(tol),
      SIZE_FIELD(max_iter),
      Field{"lambdas",
            [](RunConfig& c, const std::string& v) {
              c.lambdas = is_auto(v) ? std::vector<double>{}
                                     : map_list<double>(v, [](const std::string& s) {
                                         return to_real("lambdas", s);
                                       });
            },
            [](const RunConfig& c) {
              return c.lambdas.empty() ? std::string("auto") : list_text(c.lambdas, format_double);
            }},
      Field{"alphas",
            [](RunConfig& c, const std::string& v) {
              c.alphas = map_list<double>(v, [](const std::string& s) { return to_real("alphas", s); });
            },
            [](const RunConfig& c) { return list_text(c.alphas, format_double); }},
      SIZE_FIELD(n_lambda),
      REAL_FIELD(lambda_ratio),
      REAL_FIELD(train_frac),
      Field{"methods",
            [](RunConfig& c, const std::string& v) {
              c.methods = is_auto(v) ? std::vector<std::string>{} : split_list(v);
            },
            [](const RunConfig& c) {
              return c.methods.empty() ? std::string("auto") : join(c.methods);
            }},
      REAL_FIELD(window_frac),
      Field{"loss",
            [](RunConfig& c, const std::string& v) {
              c.loss = map_list<Loss>(v, [](const std::string& s) {
                try {
                  return parse_loss(s);
                } catch (const InvalidArgument&) {
                  throw UsageError("loss", "expected squared|absolute, got '" + s + "'");
                }
              });
            },
            [](const RunConfig& c) {
              return list_text(c.loss, [](Loss l) { return std::string(to_string(l)); });
            }},
      Field{"panel", [](RunConfig& c, const std::string& v) { c.panel = v; },
            [](const RunConfig& c) { return c.panel; }},
      BOOL_FIELD(interpolate),
      BOOL_FIELD(demean),
  };
  return table;
}

#undef SIZE_FIELD
#undef REAL_FIELD
#undef OPT_REAL_FIELD
#undef BOOL_FIELD

const Field& find_field(const std::string& key) {
  for (const Field& f : fields())
    if (f.key == key) return f;
  throw UsageError(key, "unknown configuration key");
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw UsageError(key, what);
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const Field& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

void set_field(RunConfig& cfg, const std::string& key, const std::string& value) {
  find_field(key).set(cfg, trim(value));
}

std::string get_field(const RunConfig& cfg, const std::string& key) {
  return find_field(key).get(cfg);
}

void apply_config_text(RunConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("line " + std::to_string(lineno), "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '-', '_');
    set_field(cfg, key, line.substr(eq + 1));
  }
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  apply_config_text(cfg, text);
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const RunConfig& cfg) {
  std::string out;
  for (const Field& f : fields()) out += f.key + " = " + f.get(cfg) + "\n";
  return out;
}

const char* to_string(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Estimate: return "estimate";
    case Command::Replicate: return "replicate";
    case Command::ForecastEval: return "forecast-eval";
  }
  return "";
}

std::vector<std::string> default_methods(Command c) {
  if (c == Command::Replicate) return ExperimentConfig{}.methods;
  if (c == Command::ForecastEval) return {"const", "gmwy", "splash0", "splash1", "splash_alpha"};
  return {};
}

RunConfig resolve(const RunConfig& in, Command c) {
  RunConfig cfg = in;
  if (cfg.methods.empty()) cfg.methods = default_methods(c);

  const bool simulates = c == Command::Simulate || c == Command::Replicate;
  if (simulates) {
    if (cfg.design == Design::A) {
      require(cfg.n >= 4, "n", "design A needs at least 4 units");
      require(cfg.k0 >= 1 && cfg.k0 < cfg.n / 4, "k0", "must lie in [1, floor(n/4) - 1]");
    } else {
      require(cfg.m >= 2, "m", "grid side must be at least 2");
      if (!cfg.b_diag) cfg.b_diag = cfg.m == 7 ? 0.23 : 0.25;
    }
    require(cfg.t >= 2, "t", "need at least 2 time points");
  }
  if (c == Command::Replicate) {
    require(cfg.reps >= 1, "reps", "must be positive");
    require(cfg.t >= 10, "t", "replications need at least 10 time points");
    for (const auto& id : cfg.methods)
      require(std::find(known_methods().begin(), known_methods().end(), id) != known_methods().end(),
              "methods", "unknown method '" + id + "' (known: " + join(known_methods()) + ")");
    const std::size_t n = cfg.design == Design::A ? cfg.n : cfg.m * cfg.m;
    const std::size_t k = cfg.design == Design::A ? cfg.k0 : cfg.m;
    if (std::find(cfg.methods.begin(), cfg.methods.end(), "gmwy_k0") != cfg.methods.end())
      require(4 * k + 1 <= n, "methods",
              "gmwy_k0 needs 4k+1 <= N coefficients per equation (design B: m >= 5)");
  }
  if (c == Command::ForecastEval) {
    static const std::vector<std::string> allowed{"const", "gmwy", "pvar", "splash0", "splash1",
                                                  "splash_alpha"};
    for (const auto& id : cfg.methods)
      require(std::find(allowed.begin(), allowed.end(), id) != allowed.end(), "methods",
              "unknown method '" + id + "' (known: " + join(allowed) + ")");
    require(cfg.window_frac > 0.0 && cfg.window_frac <= 1.0, "window_frac", "must lie in (0, 1]");
    require(!cfg.loss.empty(), "loss", "at least one loss is required");
  }
  if (c == Command::Estimate || c == Command::ForecastEval)
    require(!cfg.panel.empty(), "panel", "a panel CSV file is required");

  if (c != Command::Simulate) {
    require(!cfg.alphas.empty(), "alphas", "must not be empty");
    for (double a : cfg.alphas) require(a >= 0.0 && a <= 1.0, "alphas", "values must lie in [0, 1]");
    for (std::size_t k = 0; k < cfg.lambdas.size(); ++k) {
      require(cfg.lambdas[k] >= 0.0, "lambdas", "values must be non-negative");
      require(k == 0 || cfg.lambdas[k] <= cfg.lambdas[k - 1], "lambdas", "must be descending");
    }
    require(cfg.n_lambda >= 1, "n_lambda", "must be positive");
    require(cfg.lambda_ratio > 0.0 && cfg.lambda_ratio <= 1.0, "lambda_ratio", "must lie in (0, 1]");
    require(cfg.train_frac > 0.0 && cfg.train_frac < 1.0, "train_frac", "must lie in (0, 1)");
    if (cfg.alpha) require(*cfg.alpha >= 0.0 && *cfg.alpha <= 1.0, "alpha", "must lie in [0, 1]");
    if (cfg.lambda) require(*cfg.lambda >= 0.0, "lambda", "must be non-negative");
    require(cfg.tol > 0.0, "tol", "must be positive");
    require(cfg.max_iter >= 1, "max_iter", "must be positive");
    require(cfg.n_boot >= 1, "n_boot", "must be positive");
    if (cfg.bandwidth_mode == BandwidthMode::Fixed)
      require(cfg.bandwidth.has_value(), "bandwidth", "required when bandwidth_mode = fixed");
  }
  return cfg;
}

CvGrid to_grid(const RunConfig& cfg) {
  CvGrid g;
  g.lambdas = cfg.lambdas;
  g.alphas = cfg.alphas;
  g.train_frac = cfg.train_frac;
  g.n_lambda = cfg.n_lambda;
  g.lambda_ratio = cfg.lambda_ratio;
  return g;
}

SplashSettings to_splash(const RunConfig& cfg) {
  SplashSettings s;
  s.alpha = cfg.alpha;
  s.cap = cfg.cap;
  if (cfg.bandwidth_mode == BandwidthMode::Fixed) s.bandwidth = cfg.bandwidth;
  s.h_grid = cfg.h_grid;
  s.n_boot = cfg.n_boot;
  s.block_len = cfg.block_len;
  s.solver.tol = cfg.tol;
  s.solver.max_iter = cfg.max_iter;
  return s;
}

ExperimentConfig to_experiment(const RunConfig& cfg) {
  ExperimentConfig e;
  e.design = cfg.design;
  e.n = cfg.n;
  e.k0 = cfg.k0;
  e.m = cfg.m;
  e.interaction = cfg.interaction;
  e.b_diag = cfg.b_diag;
  e.t = cfg.t;
  e.reps = cfg.reps;
  e.burn_in = cfg.burn_in;
  e.seed = cfg.seed;
  if (!cfg.methods.empty()) e.methods = cfg.methods;
  e.grid = to_grid(cfg);
  e.splash = to_splash(cfg);
  e.splash.alpha.reset();
  return e;
}

}  // namespace splash::cli
