#include "sigspline_cli/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sigspline/calibration.hpp"
#include "sigspline/csv.hpp"
#include "sigspline/errors.hpp"
#include "sigspline/evaluation.hpp"
#include "sigspline/model.hpp"
#include "sigspline/synthetic.hpp"

namespace sigspline::cli {
namespace {

using nlohmann::json;

struct CommandInfo {
  std::string name;
  std::string summary;
  json defaults;
  std::map<std::string, std::string> help;  // key -> description
};

const std::vector<CommandInfo>& commands() {
  static const std::vector<CommandInfo> all = [] {
    std::vector<CommandInfo> v;
    v.push_back({"simulate",
                 "Simulate the VAR(2) benchmark and write it as CSV",
                 json{{"output", "series.csv"},
                      {"n_lags", 4096u},
                      {"burn_in", 100u},
                      {"seed", 0u},
                      {"w1", json::array({json::array({0.1, 0.0}), json::array({0.0, 0.2})})},
                      {"w2", json::array({json::array({0.6, 0.0}), json::array({0.0, 0.3})})},
                      {"sigma", json::array({json::array({0.5, 0.0}), json::array({0.0, 0.5})})},
                      {"map", "identity"},
                      {"whiten", false}},
                 {{"output", "CSV file to write"},
                  {"n_lags", "rows kept after burn-in"},
                  {"burn_in", "initial steps discarded"},
                  {"seed", "innovation RNG seed"},
                  {"w1", "lag-1 coefficient matrix (JSON array of rows)"},
                  {"w2", "lag-2 coefficient matrix (JSON array of rows)"},
                  {"sigma", "innovation covariance (JSON array of rows)"},
                  {"map", "observation map: identity or fixed_nonlinear"},
                  {"whiten", "PCA-whiten the observed series"}}});
    v.push_back({"fit",
                 "Fit sig-spline models over several seeds and keep the best",
                 json{{"data", "series.csv"},
                      {"model_out", "model.json"},
                      {"report_out", "fit_report.json"},
                      {"level", 2u},
                      {"bins", 64u},
                      {"window", 2u},
                      {"optimizer", "gradient_descent"},
                      {"learning_rate", 0.1},
                      {"max_iters", 5000u},
                      {"patience", 32u},
                      {"grad_tol", 1e-10},
                      {"reg_kind", "none"},
                      {"reg_lambda", 0.0},
                      {"train_fraction", 0.8},
                      {"seed", 0u},
                      {"n_seeds", 10u}},
                 {{"data", "training series CSV (raw units)"},
                  {"model_out", "best model JSON"},
                  {"report_out", "multi-seed fit report JSON"},
                  {"level", "signature truncation level L"},
                  {"bins", "spline bins N"},
                  {"window", "conditioning rows r (>= 1)"},
                  {"optimizer", "gradient_descent or newton"},
                  {"learning_rate", "gradient descent step size"},
                  {"max_iters", "iteration cap per coordinate"},
                  {"patience", "consecutive test-loss increases before stopping"},
                  {"grad_tol", "stop when the gradient norm drops below this"},
                  {"reg_kind", "none, l1 or l2"},
                  {"reg_lambda", "regularisation weight"},
                  {"train_fraction", "share of windows used for training"},
                  {"seed", "first split seed"},
                  {"n_seeds", "number of seeds (seed, seed+1, ...)"}}});
    v.push_back({"sample",
                 "Generate continuations of real histories with a fitted model",
                 json{{"model", "model.json"},
                      {"history", "series.csv"},
                      {"output", "samples.csv"},
                      {"horizon", 4u},
                      {"batch", 1024u},
                      {"seed", 0u}},
                 {{"model", "model JSON from fit"},
                  {"history", "series CSV the histories are drawn from"},
                  {"output", "batch CSV of generated steps (raw units)"},
                  {"horizon", "steps generated per history"},
                  {"batch", "number of sequences"},
                  {"seed", "RNG seed"}}});
    v.push_back({"evaluate",
                 "Compare generated and real statistics over several seeds",
                 json{{"model", "model.json"},
                      {"data", "series.csv"},
                      {"report_out", "evaluation.json"},
                      {"table_out", "evaluation.txt"},
                      {"horizon", 4u},
                      {"batch", 1024u},
                      {"seeds", 10u},
                      {"seed", 0u},
                      {"abs_acf", false},
                      {"self", false},
                      {"window", 2u}},
                 {{"model", "model JSON from fit (ignored with self)"},
                  {"data", "real series CSV (raw units)"},
                  {"report_out", "report JSON"},
                  {"table_out", "text table"},
                  {"horizon", "steps per sampled sequence"},
                  {"batch", "sequences per seed"},
                  {"seeds", "number of evaluation seeds"},
                  {"seed", "first evaluation seed"},
                  {"abs_acf", "also compare the ACF of absolute returns"},
                  {"self", "evaluate the real continuations against themselves"},
                  {"window", "history length used with self"}}});
    return v;
  }();
  return all;
}

const CommandInfo& find_command(const std::string& name) {
  for (const auto& c : commands()) {
    if (c.name == name) return c;
  }
  throw ConfigError("unknown command '" + name + "'");
}

std::string flag_name(const std::string& key) {
  std::string s = key;
  for (char& c : s) {
    if (c == '_') c = '-';
  }
  return "--" + s;
}

void check_type(const std::string& key, const json& def, const json& value) {
  bool ok = false;
  const char* want = "";
  if (def.is_boolean()) {
    ok = value.is_boolean();
    want = "a boolean";
  } else if (def.is_number_unsigned()) {
    ok = value.is_number_unsigned();
    want = "a non-negative integer";
  } else if (def.is_number()) {
    ok = value.is_number() && std::isfinite(value.get<double>());
    want = "a number";
  } else if (def.is_string()) {
    ok = value.is_string();
    want = "a string";
  } else if (def.is_array()) {
    ok = value.is_array();
    want = "an array";
  }
  if (!ok) throw ConfigError("config key '" + key + "' must be " + want);
}

json parse_override(const std::string& key, const json& def, const std::string& raw) {
  if (def.is_string()) return raw;
  if (def.is_boolean()) {
    if (raw == "true") return true;
    if (raw == "false") return false;
    throw ConfigError(flag_name(key) + " expects true or false");
  }
  if (def.is_number_unsigned()) {
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec != std::errc() || end != raw.data() + raw.size()) {
      throw ConfigError(flag_name(key) + " expects a non-negative integer, got '" + raw + "'");
    }
    return v;
  }
  if (def.is_number()) {
    std::istringstream in(raw);
    double v = 0.0;
    in >> v;
    if (!in || !in.eof() || !std::isfinite(v)) {
      throw ConfigError(flag_name(key) + " expects a number, got '" + raw + "'");
    }
    return v;
  }
  json v;
  try {
    v = json::parse(raw);
  } catch (const json::exception&) {
    throw ConfigError(flag_name(key) + " expects JSON, got '" + raw + "'");
  }
  check_type(key, def, v);
  return v;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw DataError("failed writing " + path);
}

// Writes the resolved config next to an artifact that cannot embed it.
void write_sidecar(const std::string& artifact, const json& cfg) {
  write_text(artifact + ".config.json", cfg.dump(2) + "\n");
}

Eigen::MatrixXd matrix_from(const json& cfg, const std::string& key) {
  const json& a = cfg.at(key);
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const json& row = a[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      throw ConfigError("config key '" + key + "' must be a square matrix");
    }
    for (Eigen::Index c = 0; c < n; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw ConfigError("config key '" + key + "' must hold numbers");
      m(r, c) = v.get<double>();
    }
  }
  if (n == 0) throw ConfigError("config key '" + key + "' must not be empty");
  return m;
}

std::size_t size_of(const json& cfg, const char* key) { return cfg.at(key).get<std::size_t>(); }

template <typename F>
auto as_config_error(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void cmd_simulate(const json& cfg, std::ostream& out) {
  VarSpec spec;
  spec.w1 = matrix_from(cfg, "w1");
  spec.w2 = matrix_from(cfg, "w2");
  spec.sigma = matrix_from(cfg, "sigma");
  spec.n_lags = size_of(cfg, "n_lags");
  spec.burn_in = size_of(cfg, "burn_in");
  spec.rng_seed = cfg.at("seed").get<std::uint64_t>();
  const ObservationMap map =
      as_config_error([&] { return observation_map_from_string(cfg.at("map").get<std::string>()); });

  Sequence x = observe(simulate_var2(spec), map);
  if (cfg.at("whiten").get<bool>()) x = pca_whiten(x).data;
  const auto path = cfg.at("output").get<std::string>();
  write_series_csv(path, x);
  write_sidecar(path, cfg);
  const double rho = companion_spectral_radius(spec.w1, spec.w2);
  out << "simulate: wrote " << x.length() << " rows x " << x.channels() << " channels to " << path
      << "\n";
  if (rho >= 1.0) out << "simulate: warning: companion spectral radius " << rho << " >= 1\n";
}

void cmd_fit(const json& cfg, std::ostream& out) {
  TrainConfig tc;
  tc.learning_rate = cfg.at("learning_rate").get<double>();
  tc.max_iters = size_of(cfg, "max_iters");
  tc.patience = size_of(cfg, "patience");
  tc.grad_tol = cfg.at("grad_tol").get<double>();
  tc.train_fraction = cfg.at("train_fraction").get<double>();
  tc.rng_seed = cfg.at("seed").get<std::uint64_t>();
  as_config_error([&] {
    tc.reg.kind = reg_kind_from_string(cfg.at("reg_kind").get<std::string>());
    tc.reg.lambda = cfg.at("reg_lambda").get<double>();
    tc.optimizer = optimizer_from_string(cfg.at("optimizer").get<std::string>());
    tc.validate();
    return 0;
  });
  const std::size_t n_seeds = size_of(cfg, "n_seeds");
  if (n_seeds < 1) throw ConfigError("n_seeds must be >= 1");

  const Sequence raw = read_series_csv(cfg.at("data").get<std::string>());
  ModelShape shape;
  shape.dim = static_cast<std::size_t>(raw.channels());
  shape.level = size_of(cfg, "level");
  shape.bins = size_of(cfg, "bins");
  shape.window = size_of(cfg, "window");
  if (shape.window < 1) throw ConfigError("window must be >= 1");
  if (shape.bins < 1) throw ConfigError("bins must be >= 1");
  as_config_error([&] { return shape.features(); });
  if (static_cast<std::size_t>(raw.length()) < shape.window + 2) {
    throw DataError("fit: data has " + std::to_string(raw.length()) + " rows, need at least window + 2");
  }

  const Preprocessor pre = Preprocessor::fit(raw);
  const std::vector<Sequence> windows = sliding_windows(pre.forward(raw), shape.window);
  const MultiSeedResult result = multi_seed_fit(windows, shape, tc, n_seeds);

  SigSplineModel best = result.runs[result.best_run].model;
  best.set_preprocess(pre);
  json model = json::parse(model_to_json(best));
  model["config"] = cfg;
  write_text(cfg.at("model_out").get<std::string>(), model.dump(2) + "\n");

  json report = json::parse(multi_seed_report_to_json(result));
  report["config"] = cfg;
  report["parameter_count"] = best.parameter_count();
  report["samples"] = windows.size();
  write_text(cfg.at("report_out").get<std::string>(), report.dump(2) + "\n");

  out << "fit: d=" << shape.dim << " L=" << shape.level << " N=" << shape.bins
      << " r=" << shape.window << " parameters=" << best.parameter_count()
      << " test NLL mean " << result.test_loss.mean << " +- " << result.test_loss.stddev
      << " (best seed " << result.runs[result.best_run].report.config.rng_seed << ")\n";
}

SigSplineModel load_checked(const json& cfg, Eigen::Index channels) {
  const SigSplineModel model = load_model(cfg.at("model").get<std::string>());
  if (static_cast<Eigen::Index>(model.dim()) != channels) {
    throw DataError("model expects " + std::to_string(model.dim()) + " channels, data has " +
                    std::to_string(channels));
  }
  if (model.shape().window < 1) throw DataError("model has no fixed conditioning window");
  return model;
}

void cmd_sample(const json& cfg, std::ostream& out) {
  const std::size_t horizon = size_of(cfg, "horizon");
  const std::size_t batch = size_of(cfg, "batch");
  if (horizon < 1 || batch < 1) throw ConfigError("horizon and batch must be >= 1");
  const Sequence raw = read_series_csv(cfg.at("history").get<std::string>());
  const SigSplineModel model = load_checked(cfg, raw.channels());
  const auto r = static_cast<Eigen::Index>(model.shape().window);
  if (raw.length() < r) throw DataError("sample: history shorter than the model window");

  Rng rng(cfg.at("seed").get<std::uint64_t>());
  std::vector<std::size_t> order(static_cast<std::size_t>(raw.length() - r + 1));
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  const Preprocessor& pre = model.preprocess();
  std::vector<Sequence> generated;
  generated.reserve(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto t0 = static_cast<Eigen::Index>(order[b % order.size()]);
    const Sequence path = generate(model, pre.forward(raw.slice(t0, r)), horizon, rng.next());
    generated.push_back(pre.inverse(path.slice(r, static_cast<Eigen::Index>(horizon))));
  }
  const auto path = cfg.at("output").get<std::string>();
  write_batch_csv(path, generated);
  write_sidecar(path, cfg);
  out << "sample: wrote " << batch << " sequences of " << horizon << " steps to " << path << "\n";
}

void cmd_evaluate(const json& cfg, std::ostream& out) {
  EvaluationOptions o;
  o.horizon = size_of(cfg, "horizon");
  o.batch = size_of(cfg, "batch");
  o.seeds = size_of(cfg, "seeds");
  o.rng_seed = cfg.at("seed").get<std::uint64_t>();
  o.abs_return_acf = cfg.at("abs_acf").get<bool>();
  if (o.horizon < 1 || o.batch < 1 || o.seeds < 1) {
    throw ConfigError("horizon, batch and seeds must be >= 1");
  }
  const Sequence real = read_series_csv(cfg.at("data").get<std::string>());

  EvaluationReport rep;
  std::string label;
  if (cfg.at("self").get<bool>()) {
    const std::size_t window = size_of(cfg, "window");
    if (window < 1) throw ConfigError("window must be >= 1");
    rep = evaluate_self(real, window, o);
    label = "real";
  } else {
    const SigSplineModel model = load_checked(cfg, real.channels());
    rep = evaluate(model, real, o);
    label = "sigspline L=" + std::to_string(model.shape().level);
  }

  json report = json::parse(evaluation_report_to_json(rep));
  report["config"] = cfg;
  write_text(cfg.at("report_out").get<std::string>(), report.dump(2) + "\n");

  std::ostringstream table;
  table << "# sigspline evaluate; l1 discrepancy mean +- std over " << o.seeds
        << " seeds; kurtosis is raw (normal = 3)\n";
  table << "# config " << cfg.dump() << "\n";
  table << render_table({{label, rep}});
  write_text(cfg.at("table_out").get<std::string>(), table.str());
  out << table.str();
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& c : commands()) v.push_back(c.name);
    return v;
  }();
  return names;
}

std::string default_config(const std::string& command) {
  json cfg = find_command(command).defaults;
  cfg["command"] = command;
  return cfg.dump(2);
}

std::string resolve_config(const std::string& command, const std::string& config_path,
                           const std::vector<std::pair<std::string, std::string>>& overrides) {
  const CommandInfo& info = find_command(command);
  json cfg = info.defaults;
  if (!config_path.empty()) {
    json file;
    try {
      file = json::parse(read_text(config_path));
    } catch (const json::exception& e) {
      throw ConfigError("config " + config_path + ": " + e.what());
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
    if (!file.is_object()) throw ConfigError("config " + config_path + " must be a JSON object");
    for (const auto& [key, value] : file.items()) {
      if (key == "command") {
        // Echoed configs carry their command; accept them back unchanged.
        if (value != command) throw ConfigError("config is for command '" + value.dump() + "'");
        continue;
      }
      if (!info.defaults.contains(key)) {
        throw ConfigError("config " + config_path + ": unknown key '" + key + "'");
      }
      check_type(key, info.defaults.at(key), value);
      cfg[key] = value;
    }
  }
  for (const auto& [key, raw] : overrides) {
    if (!info.defaults.contains(key)) throw ConfigError("unknown option '" + flag_name(key) + "'");
    cfg[key] = parse_override(key, info.defaults.at(key), raw);
  }
  cfg["command"] = command;
  return cfg.dump(2);
}

void run_command(const std::string& command, const std::string& resolved, std::ostream& out) {
  const json cfg = json::parse(resolved);
  if (command == "simulate") {
    cmd_simulate(cfg, out);
  } else if (command == "fit") {
    cmd_fit(cfg, out);
  } else if (command == "sample") {
    cmd_sample(cfg, out);
  } else if (command == "evaluate") {
    cmd_evaluate(cfg, out);
  } else {
    throw ConfigError("unknown command '" + command + "'");
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Signature spline flows for time series: simulate, fit, sample, evaluate"};
  app.require_subcommand(1);
  app.footer("Environment: SIGSPLINE_THREADS sets the worker thread count for fit (default 1).\n"
             "Exit codes: 0 success, 1 usage or config error, 2 data error, 3 numerical failure.");

  struct Parsed {
    CLI::App* sub = nullptr;
    std::string config;
    std::map<std::string, std::string> values;
    std::map<std::string, bool> flags;
    std::map<std::string, CLI::Option*> options;
  };
  std::vector<Parsed> parsed(commands().size());
  for (std::size_t i = 0; i < commands().size(); ++i) {
    const CommandInfo& info = commands()[i];
    Parsed& p = parsed[i];
    p.sub = app.add_subcommand(info.name, info.summary);
    p.sub->add_option("--config", p.config, "JSON config file; flags override its keys");
    for (const auto& [key, def] : info.defaults.items()) {
      const std::string desc = info.help.at(key);
      if (def.is_boolean()) {
        p.options[key] = p.sub->add_flag(flag_name(key), p.flags[key], desc + " (default " +
                                                                          def.dump() + ")");
      } else {
        const char* type = def.is_number_unsigned() ? "UINT"
                           : def.is_number()        ? "FLOAT"
                           : def.is_array()         ? "JSON"
                                                    : "TEXT";
        p.options[key] = p.sub->add_option(flag_name(key), p.values[key], desc)
                             ->type_name(type)
                             ->default_str(def.is_string() ? def.get<std::string>() : def.dump())
                             ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  for (std::size_t i = 0; i < commands().size(); ++i) {
    Parsed& p = parsed[i];
    if (!p.sub->parsed()) continue;
    const std::string& name = commands()[i].name;
    try {
      std::vector<std::pair<std::string, std::string>> overrides;
      for (const auto& [key, opt] : p.options) {
        if (opt->count() == 0) continue;
        overrides.emplace_back(key, p.flags.count(key) ? (p.flags[key] ? "true" : "false")
                                                       : p.values[key]);
      }
      run_command(name, resolve_config(name, p.config, overrides), out);
      return kExitOk;
    } catch (const ConfigError& e) {
      err << "sigspline " << name << ": " << e.what() << "\n";
      return kExitUsage;
    } catch (const NumericalError& e) {
      err << "sigspline " << name << ": numerical failure: " << e.what() << "\n";
      return kExitNumerical;
    } catch (const std::exception& e) {
      err << "sigspline " << name << ": " << e.what() << "\n";
      return kExitData;
    }
  }
  return kExitUsage;
}

}  // namespace sigspline::cli
