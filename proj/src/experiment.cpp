#include "qml/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>

#include <json.hpp>

#include "qml/coupling.hpp"
#include "qml/csv.hpp"
#include "qml/errors.hpp"
#include "qml/hyperbolic_times.hpp"
#include "qml/inducing.hpp"
#include "qml/maps.hpp"
#include "qml/orbits.hpp"
#include "qml/parallel.hpp"
#include "qml/statistics.hpp"

namespace qml {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

namespace {

using Setter = std::function<void(ExperimentConfig&, const nlohmann::json&)>;

template <class T>
Setter integer_field(T ExperimentConfig::*member, const char* key) {
  return [member, key](ExperimentConfig& c, const nlohmann::json& v) {
    if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_unsigned())
        c.*member = v.get<T>();
      else if (v.get<std::int64_t>() >= 0)
        c.*member = static_cast<T>(v.get<std::int64_t>());
      else
        throw ConfigError(key, "expected a non-negative integer");
    } else {
      c.*member = v.get<T>();
    }
  };
}

Setter real_field(double ExperimentConfig::*member, const char* key) {
  return [member, key](ExperimentConfig& c, const nlohmann::json& v) {
    if (!v.is_number()) throw ConfigError(key, "expected a number");
    c.*member = v.get<double>();
  };
}

Setter string_field(std::string ExperimentConfig::*member, const char* key) {
  return [member, key](ExperimentConfig& c, const nlohmann::json& v) {
    if (!v.is_string()) throw ConfigError(key, "expected a string");
    c.*member = v.get<std::string>();
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"command", string_field(&ExperimentConfig::command, "command")},
      {"seed", integer_field(&ExperimentConfig::seed, "seed")},
      {"law", string_field(&ExperimentConfig::law, "law")},
      {"family", string_field(&ExperimentConfig::family, "family")},
      {"max_n", integer_field(&ExperimentConfig::max_n, "max_n")},
      {"n_max", integer_field(&ExperimentConfig::n_max, "n_max")},
      {"samples", integer_field(&ExperimentConfig::samples, "samples")},
      {"burnin", integer_field(&ExperimentConfig::burnin, "burnin")},
      {"horizon", integer_field(&ExperimentConfig::horizon, "horizon")},
      {"pairs", integer_field(&ExperimentConfig::pairs, "pairs")},
      {"orbits", integer_field(&ExperimentConfig::orbits, "orbits")},
      {"ell0", integer_field(&ExperimentConfig::ell0, "ell0")},
      {"levels", integer_field(&ExperimentConfig::levels, "levels")},
      {"window_lo", integer_field(&ExperimentConfig::window_lo, "window_lo")},
      {"window_hi", integer_field(&ExperimentConfig::window_hi, "window_hi")},
      {"eps1", real_field(&ExperimentConfig::eps1, "eps1")},
      {"eta", real_field(&ExperimentConfig::eta, "eta")},
      {"c", real_field(&ExperimentConfig::c, "c")},
      {"log_alpha", real_field(&ExperimentConfig::log_alpha, "log_alpha")},
      {"phi", string_field(&ExperimentConfig::phi, "phi")},
      {"psi", string_field(&ExperimentConfig::psi, "psi")},
      {"tail_law", string_field(&ExperimentConfig::tail_law, "tail_law")},
      {"model", string_field(&ExperimentConfig::model, "model")},
      {"out", string_field(&ExperimentConfig::out, "out")},
      {"threads", integer_field(&ExperimentConfig::threads, "threads")},
  };
  return table;
}

const std::vector<std::string> kCommands = {"tail", "markov", "correlate", "couple",
                                            "cone", "pliss", "expansion"};

}  // namespace

void apply_json_config(ExperimentConfig& cfg, const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(key, "unknown configuration key");
    it->second(cfg, value);
  }
}

void validate_config(const ExperimentConfig& cfg) {
  if (std::find(kCommands.begin(), kCommands.end(), cfg.command) == kCommands.end())
    throw ConfigError("command", "unknown command '" + cfg.command + "'");

  std::optional<ParameterLaw> law;
  try {
    law = ParameterLaw::parse(cfg.law);
  } catch (const std::exception& e) {
    throw ConfigError("law", e.what());
  }
  Family family{};
  try {
    family = parse_family(cfg.family);
  } catch (const std::exception& e) {
    throw ConfigError("family", e.what());
  }

  auto at_least = [](const char* key, std::int64_t v, std::int64_t lo) {
    if (v < lo) throw ConfigError(key, "must be >= " + std::to_string(lo));
  };
  at_least("max_n", cfg.max_n, 2);
  at_least("n_max", cfg.n_max, 1);
  at_least("samples", cfg.samples, 1);
  at_least("burnin", cfg.burnin, 0);
  at_least("pairs", cfg.pairs, 1);
  at_least("orbits", cfg.orbits, 1);
  at_least("ell0", cfg.ell0, 1);
  at_least("levels", cfg.levels, 1);
  at_least("horizon", cfg.horizon, 1);
  at_least("window_lo", cfg.window_lo, 0);
  at_least("window_hi", cfg.window_hi, 0);
  at_least("threads", cfg.threads, 0);
  if (cfg.max_n > 1000000) throw ConfigError("max_n", "must be <= 1000000");
  if (cfg.window_hi > 0 && cfg.window_hi < cfg.window_lo)
    throw ConfigError("window_hi", "must be >= window_lo");
  if (!(cfg.eps1 > 0.0 && cfg.eps1 < 1.0)) throw ConfigError("eps1", "must lie in (0,1)");
  if (!(cfg.eta > 0.0 && cfg.eta <= 1.0)) throw ConfigError("eta", "must lie in (0,1]");
  if (!(cfg.c > 0.0)) throw ConfigError("c", "must be positive");
  if (!(cfg.log_alpha < 0.0)) throw ConfigError("log_alpha", "must be negative");
  if (cfg.out.empty()) throw ConfigError("out", "must name a directory");
  try {
    parse_rate_model(cfg.model);
  } catch (const std::exception& e) {
    throw ConfigError("model", e.what());
  }

  const std::string& cmd = cfg.command;
  if (cmd == "tail" || cmd == "markov") {
    if (!(law->support_min() > 0.0 && law->support_max() < 1.0))
      throw ConfigError("law", "support must lie inside (0,1) for the return partition");
  } else {
    auto check_family_law = [&](Family f) {
      try {
        visit_family(f, [&](auto fam) { decltype(fam)::validate(Environment(cfg.seed, *law)); });
      } catch (const std::exception& e) {
        throw ConfigError("law", e.what());
      }
    };
    if (cmd == "correlate" || cmd == "pliss" || cmd == "expansion") check_family_law(family);
    if (cmd == "cone") check_family_law(Family::solenoid);
  }
  if (cmd == "correlate") {
    for (auto [key, text] : {std::pair{"phi", &cfg.phi}, std::pair{"psi", &cfg.psi}}) {
      try {
        Observable::parse(*text).check_family(family);
      } catch (const std::exception& e) {
        throw ConfigError(key, e.what());
      }
    }
  }
  if (cmd == "couple") {
    if (cfg.horizon < 2 * cfg.ell0) throw ConfigError("horizon", "must be >= 2 ell0");
    if (cfg.horizon > 100000000) throw ConfigError("horizon", "must be <= 1e8");
    try {
      TailLaw::parse(cfg.tail_law, 1);
    } catch (const std::exception& e) {
      throw ConfigError("tail_law", e.what());
    }
  }
  if (cmd == "expansion" && cfg.orbits < 1000)
    throw ConfigError("orbits", "expansion tails need at least 1000 starts");
  if (cmd == "cone" && cfg.n_max > 30) throw ConfigError("n_max", "cone pushes are limited to 30");
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

namespace {

struct Output {
  fs::path dir;
  json results = json::object();
  json checks = json::object();
  std::string status = "ok";
  std::string plot;

  std::ofstream open(const std::string& name) const {
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  }
};

json fit_json(const RateFit& f) { return json::parse(rate_fit_json(f)); }

std::pair<std::int64_t, std::int64_t> window_or(const ExperimentConfig& cfg, std::int64_t lo,
                                                std::int64_t hi) {
  return {cfg.window_lo > 0 ? cfg.window_lo : lo, cfg.window_hi > 0 ? cfg.window_hi : hi};
}

std::string plot_script(const std::string& file, const std::string& title, bool logx, bool logy,
                        const std::string& columns) {
  std::string s = "set datafile separator ','\nset key autotitle columnhead\n";
  if (logx) s += "set logscale x\n";
  if (logy) s += "set logscale y\n";
  s += "set title '" + title + "'\nplot '" + file + "' using " + columns + " with linespoints\n";
  return s;
}

void run_tail(const ExperimentConfig& cfg, const Environment& env, Output& out) {
  const auto max_n = static_cast<int>(cfg.max_n);
  const auto part = build_partition(env, max_n);
  {
    auto f = out.open("tail.csv");
    f << "n,tail\n";
    for (int m = 1; m <= max_n; ++m) f << m << ',' << fmt17(tail_measure(part, m)) << '\n';
  }
  {
    auto f = out.open("partition.csv");
    write_partition_csv(f, part);
  }
  const auto [lo, hi] = window_or(cfg, cfg.max_n >= 100 ? 50 : 1, cfg.max_n);
  std::vector<double> n, y;
  for (auto m = std::max<std::int64_t>(lo, 1); m <= std::min(hi, cfg.max_n); ++m) {
    n.push_back(static_cast<double>(m));
    y.push_back(tail_measure(part, static_cast<int>(m)));
  }
  const double mass = total_mass(part);
  out.results["fit"] = fit_json(fit_log_model(n, y, RateModel::polynomial));
  out.results["total_mass"] = mass;
  out.results["mass_defect"] = std::abs(mass - 1.0);
  out.results["cells"] = part.cells.size();
  out.checks["mass_conserved"] = std::abs(mass - 1.0) <= 1e-10;
  out.plot = plot_script("tail.csv", "Leb{R > n}", true, true, "1:2");
}

void run_markov(const ExperimentConfig& cfg, const Environment& env, Output& out) {
  const auto max_n = static_cast<int>(cfg.max_n);
  const auto part = build_partition(env, max_n);
  double worst = 0.0;
  auto f = out.open("markov.csv");
  f << "n,defect\n";
  for (int n = 1; n <= max_n; ++n) {
    const double d = markov_check(part, n);
    worst = std::max(worst, d);
    f << n << ',' << fmt17(d) << '\n';
  }
  out.results["max_defect"] = worst;
  out.checks["markov_defect_below_1e-10"] = worst <= 1e-10;
  out.plot = plot_script("markov.csv", "Markov defect", false, true, "1:2");
}

int run_correlate(const ExperimentConfig& cfg, const Environment& env, Output& out) {
  CorrelationRequest req{env,
                         parse_family(cfg.family),
                         Observable::parse(cfg.phi),
                         Observable::parse(cfg.psi),
                         cfg.n_max,
                         cfg.burnin,
                         cfg.samples,
                         Exec::parallel};
  const auto series = quenched_correlation(req);
  {
    auto f = out.open("correlation.csv");
    write_correlation_csv(f, series);
  }
  out.plot = plot_script("correlation.csv", "|C_n|", true, true, "1:(abs($2))");
  const bool all_zero =
      std::all_of(series.values.begin(), series.values.end(), [](double v) { return v == 0.0; });
  out.results["burnin"] = series.meta.burnin;
  out.results["samples"] = series.meta.samples;
  out.results["phi"] = series.meta.phi;
  out.results["psi"] = series.meta.psi;
  out.results["all_zero"] = all_zero;
  double bound = 0.0;
  for (double v : series.values) bound = std::max(bound, std::abs(v));
  out.checks["bounded_by_2"] = bound <= 2.0;
  if (all_zero) {
    out.results["fit"] = nullptr;
    return kExitOk;
  }
  try {
    const auto fit = fit_rate(series, parse_rate_model(cfg.model), window_or(cfg, 1, cfg.n_max));
    out.results["fit"] = fit_json(fit);
  } catch (const InsufficientSignal& e) {
    out.results["fit"] = nullptr;
    out.results["significant_lags"] = e.significant_lags();
    out.results["diagnostic"] = e.what();
    out.status = "insufficient_signal";
    return kExitInsufficientSignal;
  }
  return kExitOk;
}

void run_couple(const ExperimentConfig& cfg, const Environment& env, Output& out) {
  const auto cap = static_cast<int>(std::min<std::int64_t>(10 * cfg.horizon, 1 << 30));
  const auto law = TailLaw::parse(cfg.tail_law, cap);
  CouplingOptions opts;
  opts.levels = static_cast<int>(cfg.levels);
  const auto run = run_coupling(env, law, cfg.pairs, cfg.horizon, static_cast<int>(cfg.ell0), opts);
  const auto curve = uncoupled_mass_curve(run, cfg.eps1);
  {
    auto f = out.open("tau.csv");
    write_tau_csv(f, run);
  }
  {
    auto f = out.open("mass.csv");
    write_mass_csv(f, curve);
  }
  {
    auto f = out.open("T_tail.csv");
    f << "n,T_tail\n";
    for (std::size_t n = 0; n < run.Ti_tail[0].size(); ++n)
      f << n << ',' << fmt17(run.Ti_tail[0][n]) << '\n';
  }
  bool gaps_ok = true;
  for (const auto& taus : run.tau_records)
    for (std::size_t i = 0; i < taus.size(); ++i)
      gaps_ok = gaps_ok && taus[i] >= (i == 0 ? 0 : taus[i - 1]) + cfg.ell0;
  bool t_ok = true;
  std::int64_t censored = 0;
  for (auto t : run.T_samples) {
    t_ok = t_ok && t >= 2 * cfg.ell0;
    censored += t > cfg.horizon;
  }
  const auto [lo, hi] = window_or(cfg, 20, std::max<std::int64_t>(cfg.horizon / 10, 21));
  std::vector<double> n, y;
  for (auto k = lo; k <= std::min(hi, cfg.horizon); ++k) {
    n.push_back(static_cast<double>(k));
    y.push_back(run.Ti_tail[0][static_cast<std::size_t>(k)]);
  }
  const auto model = law.kind() == TailLaw::Kind::polynomial ? RateModel::polynomial
                     : law.kind() == TailLaw::Kind::stretched ? RateModel::stretched
                                                              : RateModel::exponential;
  try {
    out.results["T_tail_fit"] = fit_json(fit_log_model(n, y, model));
  } catch (const ArgumentError& e) {
    out.results["T_tail_fit"] = nullptr;
    out.results["diagnostic"] = e.what();
  }
  out.results["return_mean"] = law.mean();
  out.results["censored_fraction"] = static_cast<double>(censored) / static_cast<double>(cfg.pairs);
  out.checks["tau_gaps_at_least_ell0"] = gaps_ok;
  out.checks["T_at_least_2ell0"] = t_ok;
  bool monotone = true;
  for (std::size_t i = 1; i < curve.size(); ++i) monotone = monotone && curve[i] <= curve[i - 1];
  out.checks["mass_curve_nonincreasing"] = monotone;
  out.plot = plot_script("T_tail.csv", "P{T > n}", true, true, "1:2");
}

void run_cone(const ExperimentConfig& cfg, const Environment& env, Output& out) {
  const auto pushes = cfg.n_max;
  const auto width = static_cast<std::size_t>(pushes) + 1;
  std::vector<double> worst(width, 0.0);
  for (std::int64_t i = 0; i < cfg.orbits; ++i) {
    SolenoidPoint p = reference_point<SolenoidFamily>(env, i);
    ConeState cone = initial_cone();
    const double w0 = cone.width();
    for (std::int64_t k = 0; k < pushes; ++k) {
      const double alpha = env.param_at(k);
      cone = cone_push(alpha, CirclePoint{p.x}, cone);
      p = eval_g(alpha, p);
      worst[static_cast<std::size_t>(k) + 1] =
          std::max(worst[static_cast<std::size_t>(k) + 1], cone.width() / w0);
    }
  }
  worst[0] = 1.0;
  bool ok = true;
  auto f = out.open("cone.csv");
  f << "n,max_width_ratio,bound\n";
  for (std::size_t n = 0; n < width; ++n) {
    const double bound = std::pow(10.0, -static_cast<double>(n));
    ok = ok && worst[n] <= bound;
    f << n << ',' << fmt17(worst[n]) << ',' << fmt17(bound) << '\n';
  }
  out.results["pushes"] = pushes;
  out.results["final_ratio"] = worst.back();
  out.checks["width_below_10^-n"] = ok;
  out.plot = plot_script("cone.csv", "cone width / initial width", false, true, "1:2");
}

void run_pliss(const ExperimentConfig& cfg, const Environment& env, Output& out) {
  const auto family = parse_family(cfg.family);
  const auto starts = uniform_start_grid(family, cfg.orbits);
  std::vector<double> density(starts.size());
  std::vector<std::int64_t> etime(starts.size(), -1);
  std::vector<int> bound_ok(starts.size(), 1);
  visit_family(family, [&](auto fam) {
    using F = decltype(fam);
    using P = typename F::point_type;
    const auto count = static_cast<std::int64_t>(starts.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < count; ++i) {
      const auto tr = trace<F>(env, std::get<P>(starts[static_cast<std::size_t>(i)]), cfg.horizon);
      const auto rep = analyze_trace(tr, cfg.log_alpha, cfg.c);
      density[static_cast<std::size_t>(i)] = rep.density_lower_bound;
      if (rep.expansion_time) etime[static_cast<std::size_t>(i)] = *rep.expansion_time;
      double sum = 0.0, max_abs = 0.0;
      for (double v : tr) {
        sum += v;
        max_abs = std::max(max_abs, std::abs(v));
      }
      const double avg = sum / static_cast<double>(tr.size());
      const double la = std::abs(cfg.log_alpha);
      if (avg <= -cfg.c && la < cfg.c && cfg.c <= max_abs)
        bound_ok[static_cast<std::size_t>(i)] =
            density[static_cast<std::size_t>(i)] >= pliss_density_bound(cfg.c, cfg.log_alpha, max_abs);
    }
  });
  auto f = out.open("pliss.csv");
  f << "start,hyperbolic_density,expansion_time\n";
  double mean = 0.0, lowest = 1.0;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    f << i << ',' << fmt17(density[i]) << ',' << etime[i] << '\n';
    mean += density[i];
    lowest = std::min(lowest, density[i]);
  }
  out.results["mean_density"] = mean / static_cast<double>(starts.size());
  out.results["min_density"] = lowest;
  out.checks["pliss_bound_holds"] = std::all_of(bound_ok.begin(), bound_ok.end(), [](int v) { return v; });
  out.plot = plot_script("pliss.csv", "density of hyperbolic times", false, false, "1:2");
}

void run_expansion(const ExperimentConfig& cfg, const Environment& env, Output& out) {
  const auto family = parse_family(cfg.family);
  const auto starts = uniform_start_grid(family, cfg.orbits);
  const auto tail = expansion_tail(env, family, starts, cfg.horizon, cfg.c);
  auto f = out.open("expansion.csv");
  f << "n,fraction\n";
  std::vector<double> n, y;
  bool monotone = true;
  for (std::size_t i = 0; i < tail.size(); ++i) {
    f << tail[i].first << ',' << fmt17(tail[i].second) << '\n';
    if (i > 0) monotone = monotone && tail[i].second <= tail[i - 1].second;
    if (tail[i].first >= 1 && tail[i].second > 0.0) {
      n.push_back(static_cast<double>(tail[i].first));
      y.push_back(tail[i].second);
    }
  }
  out.checks["fraction_nonincreasing"] = monotone;
  if (n.size() >= 2)
    out.results["fit"] = fit_json(fit_log_model(n, y, parse_rate_model(cfg.model)));
  else
    out.results["fit"] = nullptr;
  out.results["fraction_at_1"] = tail.size() > 1 ? tail[1].second : 0.0;
  out.plot = plot_script("expansion.csv", "Leb{E > n}", false, true, "1:2");
}

json config_json(const ExperimentConfig& c) {
  json j;
  j["command"] = c.command;
  j["seed"] = c.seed;
  j["law"] = c.law;
  j["family"] = c.family;
  j["max_n"] = c.max_n;
  j["n_max"] = c.n_max;
  j["samples"] = c.samples;
  j["burnin"] = c.burnin;
  j["horizon"] = c.horizon;
  j["pairs"] = c.pairs;
  j["orbits"] = c.orbits;
  j["ell0"] = c.ell0;
  j["levels"] = c.levels;
  j["window_lo"] = c.window_lo;
  j["window_hi"] = c.window_hi;
  j["eps1"] = c.eps1;
  j["eta"] = c.eta;
  j["c"] = c.c;
  j["log_alpha"] = c.log_alpha;
  j["phi"] = c.phi;
  j["psi"] = c.psi;
  j["tail_law"] = c.tail_law;
  j["model"] = c.model;
  j["out"] = c.out;
  j["threads"] = c.threads;
  return j;
}

int configured_threads(const ExperimentConfig& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  if (const char* env = std::getenv("QML_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    throw ConfigError("QML_THREADS", "must be a positive integer");
  }
  return 0;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  try {
    validate_config(cfg);
    set_worker_count(configured_threads(cfg));
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  Output out;
  out.dir = cfg.out;
  int code = kExitOk;
  try {
    fs::create_directories(out.dir);
    const Environment env(cfg.seed, ParameterLaw::parse(cfg.law));
    const auto& cmd = cfg.command;
    if (cmd == "tail") run_tail(cfg, env, out);
    else if (cmd == "markov") run_markov(cfg, env, out);
    else if (cmd == "correlate") code = run_correlate(cfg, env, out);
    else if (cmd == "couple") run_couple(cfg, env, out);
    else if (cmd == "cone") run_cone(cfg, env, out);
    else if (cmd == "pliss") run_pliss(cfg, env, out);
    else run_expansion(cfg, env, out);
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::domain_error& e) {
    log << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::out_of_range& e) {
    log << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  json summary;
  summary["command"] = cfg.command;
  summary["status"] = out.status;
  summary["seed"] = cfg.seed;
  summary["law"] = cfg.law;
  summary["family"] = cfg.family;
  summary["config"] = config_json(cfg);
  summary["results"] = out.results;
  summary["checks"] = out.checks;
  {
    auto f = out.open("summary.json");
    f << summary.dump(2) << '\n';
  }
  {
    auto f = out.open("plot.gp");
    f << out.plot;
  }
  if (code == kExitInsufficientSignal)
    log << "insufficient signal: " << out.results.value("diagnostic", std::string{}) << '\n';
  return code;
}

}  // namespace qml
