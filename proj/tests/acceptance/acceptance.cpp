// Acceptance run: one PASS/FAIL line per criterion. Experiment parameters
// come from the JSON manifests in the directory given as argv[1].

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qml/coupling.hpp"
#include "qml/errors.hpp"
#include "qml/experiment.hpp"
#include "qml/hyperbolic_times.hpp"
#include "qml/inducing.hpp"
#include "qml/maps.hpp"
#include "qml/statistics.hpp"

using namespace qml;
namespace fs = std::filesystem;

namespace {

fs::path manifest_dir;

ExperimentConfig manifest(const std::string& name) {
  std::ifstream in(manifest_dir / name);
  if (!in) throw std::runtime_error("cannot read manifest " + (manifest_dir / name).string());
  std::stringstream text;
  text << in.rdbuf();
  ExperimentConfig cfg;
  apply_json_config(cfg, text.str());
  validate_config(cfg);
  return cfg;
}

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RateFit tail_fit(const ReturnPartition& p, std::int64_t lo, std::int64_t hi) {
  std::vector<double> n, y;
  for (auto m = lo; m <= hi; ++m) {
    n.push_back(static_cast<double>(m));
    y.push_back(tail_measure(p, static_cast<int>(m)));
  }
  return fit_log_model(n, y, RateModel::polynomial);
}

// ---------------------------------------------------------------------------

Verdict lsv_tail() {
  const auto cfg = manifest("lsv_tail.json");
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = build_partition(Environment(cfg.seed, ParameterLaw::parse(cfg.law)), static_cast<int>(cfg.max_n));
  const auto fit = tail_fit(p, cfg.window_lo, cfg.window_hi);
  const double secs = seconds_since(t0);
  const bool ok = std::abs(fit.exponent + 2.0) <= 0.15 && secs < 10.0;
  return {ok, fmt("slope %.4f over [%lld,%lld] (want -2 +- 0.15), r2 %.5f, %.2f s", fit.exponent,
                  static_cast<long long>(cfg.window_lo), static_cast<long long>(cfg.window_hi), fit.r2, secs)};
}

Verdict random_tail() {
  const auto cfg = manifest("random_tail.json");
  const auto t0 = std::chrono::steady_clock::now();
  const auto law = ParameterLaw::parse(cfg.law);
  const int max_n = static_cast<int>(cfg.max_n);
  const auto mid = build_partition(Environment(cfg.seed, law), max_n);
  const auto fast = build_partition(Environment(cfg.seed, ParameterLaw::dirac(law.support_min())), max_n);
  const auto slow = build_partition(Environment(cfg.seed, ParameterLaw::dirac(law.support_max())), max_n);
  int violations = 0;
  for (int m = 1; m <= max_n; ++m) {
    const double t = tail_measure(mid, m);
    violations += !(tail_measure(fast, m) <= t && t <= tail_measure(slow, m));
  }
  const auto fit = tail_fit(mid, cfg.window_lo, cfg.window_hi);
  const double secs = seconds_since(t0);
  const bool ok = violations == 0 && fit.exponent >= -2.15 && fit.exponent <= -1.35 && secs < 30.0;
  return {ok, fmt("%d sandwich violations over m <= %d, slope %.4f (want [-2.15,-1.35]), %.2f s", violations,
                  max_n, fit.exponent, secs)};
}

Verdict markov() {
  const auto cfg = manifest("markov.json");
  const auto t0 = std::chrono::steady_clock::now();
  const auto law = ParameterLaw::parse(cfg.law);
  double worst = 0.0;
  for (std::uint64_t seed = cfg.seed; seed < cfg.seed + 20; ++seed) {
    const auto p = build_partition(Environment(seed, law), static_cast<int>(cfg.max_n));
    for (int n = 1; n <= p.max_n; ++n) worst = std::max(worst, markov_check(p, n));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-10 && secs < 5.0,
          fmt("max defect %.3e over n <= %lld and 20 seeds, %.2f s", worst, static_cast<long long>(cfg.max_n), secs)};
}

Verdict mass() {
  const auto cfg = manifest("random_tail.json");
  const auto law = ParameterLaw::parse(cfg.law);
  double worst = 0.0;
  for (std::uint64_t seed = cfg.seed; seed < cfg.seed + 20; ++seed) {
    const auto p = build_partition(Environment(seed, law), static_cast<int>(cfg.max_n));
    worst = std::max(worst, std::abs(total_mass(p) - 1.0));
  }
  return {worst <= 1e-10, fmt("max |mass - 1| = %.3e over 20 seeds at depth %lld", worst,
                              static_cast<long long>(cfg.max_n))};
}

// Definition-level check of whether n = trace.size() is a hyperbolic time.
bool last_is_hyperbolic(const std::vector<double>& t, double log_alpha) {
  double sum = 0.0;
  for (std::size_t k = 1; k <= t.size(); ++k) {
    sum += t[t.size() - k];
    if (sum > static_cast<double>(k) * log_alpha) return false;
  }
  return true;
}

Verdict pliss() {
  const auto t0 = std::chrono::steady_clock::now();
  const double alphabet[3] = {-2.0, -1.0, 0.0};
  const double log_alpha = -1.0;  // integer sums make ties common
  std::vector<double> trace;
  std::vector<std::int64_t> expected;
  long long checked = 0, mismatches = 0;
  std::function<void()> dfs = [&] {
    if (!trace.empty()) {
      ++checked;
      if (pliss_times(trace, log_alpha) != expected) ++mismatches;
    }
    if (trace.size() == 16) return;
    for (double v : alphabet) {
      trace.push_back(v);
      const bool hit = last_is_hyperbolic(trace, log_alpha);
      if (hit) expected.push_back(static_cast<std::int64_t>(trace.size()));
      dfs();
      if (hit) expected.pop_back();
      trace.pop_back();
    }
  };
  dfs();

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 0.5);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> t(200);
    for (auto& v : t) v = u(rng);
    for (double la : {-0.25, -0.75}) {
      std::vector<double> prefix;
      std::vector<std::int64_t> want;
      for (std::size_t n = 0; n < t.size(); ++n) {
        prefix.push_back(t[n]);
        if (last_is_hyperbolic(prefix, la)) want.push_back(static_cast<std::int64_t>(n + 1));
      }
      ++checked;
      if (pliss_times(t, la) != want) ++mismatches;
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 60.0,
          fmt("%lld sequences checked, %lld mismatches, %.1f s", checked, mismatches, secs)};
}

Verdict cone() {
  const auto cfg = manifest("cone.json");
  const auto t0 = std::chrono::steady_clock::now();
  const Environment env(cfg.seed, ParameterLaw::parse(cfg.law));
  double worst = 0.0;  // max over orbits and n of ratio / 10^-n
  for (std::int64_t i = 0; i < cfg.orbits; ++i) {
    // each orbit gets its own stretch of the environment
    const Environment fibre = env.shift(i * cfg.n_max);
    SolenoidPoint p = reference_point<SolenoidFamily>(env, i);
    ConeState c = initial_cone();
    const double w0 = c.width();
    for (std::int64_t n = 1; n <= cfg.n_max; ++n) {
      const double a = fibre.param_at(n - 1);
      c = cone_push(a, {p.x}, c);
      p = eval_g(a, p);
      worst = std::max(worst, c.width() / w0 / std::pow(10.0, -static_cast<double>(n)));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1.0 && secs < 5.0,
          fmt("max width/(width0 10^-n) = %.3e over %lld orbits, n <= %lld, %.2f s", worst,
              static_cast<long long>(cfg.orbits), static_cast<long long>(cfg.n_max), secs)};
}

CorrelationSeries correlate(const ExperimentConfig& cfg) {
  CorrelationRequest req{Environment(cfg.seed, ParameterLaw::parse(cfg.law)), parse_family(cfg.family),
                         Observable::parse(cfg.phi), Observable::parse(cfg.psi)};
  req.n_max = cfg.n_max;
  req.burnin = cfg.burnin;
  req.samples = cfg.samples;
  return quenched_correlation(req);
}

Verdict solenoid_decay() {
  const auto cfg = manifest("solenoid_correlation.json");
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = correlate(cfg);
  try {
    const auto fit = fit_rate(s, RateModel::polynomial);
    const double secs = seconds_since(t0);
    const bool ok = fit.exponent >= -2.4 && fit.exponent <= -0.9 && fit.r2 >= 0.7 && secs < 600.0;
    return {ok, fmt("exponent %.3f (want [-2.4,-0.9]), r2 %.3f, %lld signal lags in [%lld,%lld], %.0f s, %d workers",
                    fit.exponent, fit.r2, static_cast<long long>(fit.points),
                    static_cast<long long>(fit.window.first), static_cast<long long>(fit.window.second), secs,
                    worker_count())};
  } catch (const InsufficientSignal& e) {
    return {false, fmt("insufficient signal: %d significant lags", e.significant_lags())};
  }
}

Verdict cat_decay() {
  const auto cfg = manifest("cat_correlation.json");
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = correlate(cfg);
  int loud = 0;
  double worst = 0.0;
  for (std::size_t n = 25; n < s.values.size(); ++n) {
    const double z = std::abs(s.values[n]) / s.std_error[n];
    worst = std::max(worst, z);
    loud += !(z < 3.0);
  }
  try {
    const auto fit = fit_rate(s, RateModel::exponential, std::pair{cfg.window_lo, cfg.window_hi});
    const double secs = seconds_since(t0);
    const bool ok = loud == 0 && fit.exponent < 0.0 && fit.r2 >= 0.8 && secs < 300.0;
    return {ok, fmt("max |C|/stderr for n >= 25: %.2f (%d lags >= 3), exp slope %.3f, r2 %.3f on [%lld,%lld], %.0f s",
                    worst, loud, fit.exponent, fit.r2, static_cast<long long>(cfg.window_lo),
                    static_cast<long long>(cfg.window_hi), secs)};
  } catch (const InsufficientSignal& e) {
    return {false, fmt("insufficient signal on [1,15]: %d significant lags", e.significant_lags())};
  }
}

RateFit coupling_fit(const ExperimentConfig& cfg, RateModel model, double* secs) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto law = TailLaw::parse(cfg.tail_law, static_cast<int>(10 * cfg.horizon));
  CouplingOptions opts;
  opts.levels = static_cast<int>(cfg.levels);
  const auto run = run_coupling(Environment(cfg.seed, ParameterLaw::dirac(0.5)), law, cfg.pairs, cfg.horizon,
                                static_cast<int>(cfg.ell0), opts);
  std::vector<double> n, y;
  for (auto k = cfg.window_lo; k <= cfg.window_hi; ++k) {
    n.push_back(static_cast<double>(k));
    y.push_back(run.Ti_tail[0][static_cast<std::size_t>(k)]);
  }
  *secs = seconds_since(t0);
  return fit_log_model(n, y, model);
}

Verdict coupling() {
  double s1 = 0, s2 = 0;
  const auto poly = coupling_fit(manifest("coupling_polynomial.json"), RateModel::polynomial, &s1);
  const auto expo = coupling_fit(manifest("coupling_exponential.json"), RateModel::exponential, &s2);
  const bool poly_ok = poly.exponent >= -2.3 && poly.exponent <= -1.6;
  const bool expo_ok = expo.exponent < 0.0 && expo.r2 >= 0.9;
  return {poly_ok && expo_ok && s1 + s2 < 300.0,
          fmt("polynomial(2): log-log slope %.3f on [%lld,%lld] (want [-2.3,-1.6]) %s; exponential(1): semilog "
              "slope %.3f, r2 %.4f %s; %.1f s",
              poly.exponent, static_cast<long long>(poly.window.first), static_cast<long long>(poly.window.second),
              poly_ok ? "ok" : "out of band", expo.exponent, expo.r2, expo_ok ? "ok" : "failed", s1 + s2)};
}

Verdict constant_null() {
  long long nonzero = 0, values = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (auto family : {Family::intermittent_circle, Family::solenoid, Family::perturbed_cat}) {
      const auto law = family == Family::perturbed_cat ? ParameterLaw::uniform(-0.05, 0.05)
                                                       : ParameterLaw::uniform(0.4, 0.6);
      for (const char* phi : {"cos", "half", family == Family::solenoid ? "fiber_y"
                                             : family == Family::perturbed_cat ? "lacunary:0.5" : "cusp:0.5"}) {
        CorrelationRequest req{Environment(seed, law), family, Observable::parse(phi), Observable::constant()};
        req.n_max = 50;
        req.samples = 10000;
        for (double v : quenched_correlation(req).values) {
          ++values;
          nonzero += v != 0.0;
        }
      }
    }
  }
  return {nonzero == 0, fmt("%lld of %lld values nonzero across 3 families, 10 seeds, 3 observables", nonzero, values)};
}

}  // namespace

int main(int argc, char** argv) {
  manifest_dir = argc > 1 ? fs::path(argv[1]) : fs::path("configs");
  const std::vector<std::pair<const char*, Verdict (*)()>> criteria = {
      {"return-tail exponent", lsv_tail},
      {"random tail sandwich", random_tail},
      {"Markov defect", markov},
      {"mass conservation", mass},
      {"Pliss oracle equivalence", pliss},
      {"cone contraction", cone},
      {"solenoid correlation decay", solenoid_decay},
      {"Axiom A exponential regime", cat_decay},
      {"coupling tail transfer", coupling},
      {"constant-observable null", constant_null},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("criterion %2zu %s  %s: %s\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu of %zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
