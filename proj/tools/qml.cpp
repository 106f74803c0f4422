// Command-line front end. Every subcommand accepts --config FILE (a JSON
// object with the ExperimentConfig field names); flags override the file.

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>

#include "qml/experiment.hpp"

namespace {

using qml::ExperimentConfig;

struct Knob {
  CLI::Option* option;
  std::function<void(ExperimentConfig&, const ExperimentConfig&)> copy;
};

template <class T>
void knob(CLI::App* app, std::vector<Knob>& knobs, ExperimentConfig& flags, const std::string& names,
          T ExperimentConfig::*member, const std::string& help) {
  auto* opt = app->add_option(names, flags.*member, help);
  knobs.push_back({opt, [member](ExperimentConfig& c, const ExperimentConfig& f) { c.*member = f.*member; }});
}

void common_knobs(CLI::App* app, std::vector<Knob>& knobs, ExperimentConfig& f) {
  knob(app, knobs, f, "--seed", &ExperimentConfig::seed, "environment seed");
  knob(app, knobs, f, "--law", &ExperimentConfig::law,
       "parameter law: dirac:a | uniform:lo,hi | finite:v1,v2;w1,w2");
  knob(app, knobs, f, "--out", &ExperimentConfig::out, "output directory");
  knob(app, knobs, f, "--threads", &ExperimentConfig::threads, "worker threads (default QML_THREADS)");
  knob(app, knobs, f, "--window-lo", &ExperimentConfig::window_lo, "first lag of the fit window");
  knob(app, knobs, f, "--window-hi", &ExperimentConfig::window_hi, "last lag of the fit window");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quenched decay experiments for random intermittent and hyperbolic systems"};
  app.require_subcommand(1);

  ExperimentConfig flags;
  std::string config_file;
  std::map<CLI::App*, std::vector<Knob>> knobs;

  auto sub = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("--config", config_file, "JSON manifest; flags override it");
    common_knobs(s, knobs[s], flags);
    return s;
  };
  auto& F = flags;

  auto* tail = sub("tail", "return partition and Leb{R > n}");
  knob(tail, knobs[tail], F, "--max-n", &ExperimentConfig::max_n, "partition depth");

  auto* markov = sub("markov", "Markov defect of the return partition");
  knob(markov, knobs[markov], F, "--max-n", &ExperimentConfig::max_n, "partition depth");

  auto* correlate = sub("correlate", "quenched correlations and rate fit");
  knob(correlate, knobs[correlate], F, "--family", &ExperimentConfig::family, "circle | solenoid | cat");
  knob(correlate, knobs[correlate], F, "--n-max", &ExperimentConfig::n_max, "largest lag");
  knob(correlate, knobs[correlate], F, "--samples,-N", &ExperimentConfig::samples, "ensemble size");
  knob(correlate, knobs[correlate], F, "--burnin", &ExperimentConfig::burnin, "pullback depth m (0: max(100, 2 n_max))");
  knob(correlate, knobs[correlate], F, "--phi", &ExperimentConfig::phi, "observable evaluated at time n");
  knob(correlate, knobs[correlate], F, "--psi", &ExperimentConfig::psi, "observable evaluated at time 0");
  knob(correlate, knobs[correlate], F, "--model", &ExperimentConfig::model, "polynomial | exponential | stretched");

  auto* couple = sub("couple", "tower coupling simulation");
  knob(couple, knobs[couple], F, "--tail-law", &ExperimentConfig::tail_law,
       "polynomial:a | exponential:c | stretched:c,theta | deterministic:r");
  knob(couple, knobs[couple], F, "--pairs", &ExperimentConfig::pairs, "number of orbit pairs");
  knob(couple, knobs[couple], F, "--horizon", &ExperimentConfig::horizon, "time horizon");
  knob(couple, knobs[couple], F, "--ell0", &ExperimentConfig::ell0, "minimal gap between stopping times");
  knob(couple, knobs[couple], F, "--eps1", &ExperimentConfig::eps1, "weight of the uncoupled mass proxy");
  knob(couple, knobs[couple], F, "--levels", &ExperimentConfig::levels, "iterated stopping times tracked");

  auto* cone = sub("cone", "cone contraction along solenoid orbits");
  knob(cone, knobs[cone], F, "--n-max", &ExperimentConfig::n_max, "number of pushes");
  knob(cone, knobs[cone], F, "--orbits", &ExperimentConfig::orbits, "number of orbits");

  auto* pliss = sub("pliss", "hyperbolic-time densities");
  knob(pliss, knobs[pliss], F, "--family", &ExperimentConfig::family, "circle | solenoid | cat");
  knob(pliss, knobs[pliss], F, "--orbits", &ExperimentConfig::orbits, "number of starts");
  knob(pliss, knobs[pliss], F, "--horizon", &ExperimentConfig::horizon, "trace length");
  knob(pliss, knobs[pliss], F, "--log-alpha", &ExperimentConfig::log_alpha, "log of the hyperbolic-time rate");
  knob(pliss, knobs[pliss], F, "--c", &ExperimentConfig::c, "expansion constant");

  auto* expansion = sub("expansion", "tail of the expansion time");
  knob(expansion, knobs[expansion], F, "--family", &ExperimentConfig::family, "circle | solenoid | cat");
  knob(expansion, knobs[expansion], F, "--orbits", &ExperimentConfig::orbits, "number of starts (>= 1000)");
  knob(expansion, knobs[expansion], F, "--horizon", &ExperimentConfig::horizon, "trace length");
  knob(expansion, knobs[expansion], F, "--c", &ExperimentConfig::c, "expansion constant");
  knob(expansion, knobs[expansion], F, "--model", &ExperimentConfig::model, "fit model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return qml::kExitInvalid;
  }

  CLI::App* chosen = app.get_subcommands().front();
  ExperimentConfig cfg;
  try {
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw qml::ConfigError("config", "cannot read " + config_file);
      std::stringstream text;
      text << in.rdbuf();
      qml::apply_json_config(cfg, text.str());
    }
  } catch (const qml::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return qml::kExitInvalid;
  }
  if (!cfg.command.empty() && cfg.command != chosen->get_name()) {
    std::cerr << "error: invalid command: config file names '" << cfg.command << "' but '"
              << chosen->get_name() << "' was requested\n";
    return qml::kExitInvalid;
  }
  cfg.command = chosen->get_name();
  for (const auto& k : knobs[chosen])
    if (k.option->count() > 0) k.copy(cfg, flags);

  return qml::run_experiment(cfg, std::cerr);
}
