#pragma once

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>

namespace qml {

/// One experiment, as read from flags and/or a JSON manifest. Field names
/// double as the JSON keys; flags use the same names with dashes.
struct ExperimentConfig {
  std::string command;  // tail, markov, correlate, couple, cone, pliss, expansion
  std::uint64_t seed = 1;
  std::string law = "dirac:0.5";
  std::string family = "solenoid";

  std::int64_t max_n = 5000;    // partition depth (tail, markov)
  std::int64_t n_max = 200;     // correlation lags, cone pushes
  std::int64_t samples = 100000;
  std::int64_t burnin = 0;      // 0: max(100, 2 n_max)
  std::int64_t horizon = 2000;
  std::int64_t pairs = 100000;
  std::int64_t orbits = 1000;   // starts for cone, pliss, expansion
  std::int64_t ell0 = 5;
  std::int64_t levels = 16;
  std::int64_t window_lo = 0;   // 0: command default
  std::int64_t window_hi = 0;
  double eps1 = 0.5;
  double eta = 0.5;
  double c = 0.3;
  double log_alpha = -0.1;
  std::string phi = "cos";
  std::string psi = "cos";
  std::string tail_law = "polynomial:2";
  std::string model = "polynomial";
  std::string out = "out";
  int threads = 0;  // 0: QML_THREADS, then the OpenMP default
};

/// Invalid configuration; `key` names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument("invalid " + key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Overlays a JSON manifest onto cfg. Unknown keys and type mismatches throw
/// ConfigError.
void apply_json_config(ExperimentConfig& cfg, const std::string& json_text);

/// Checks every knob against the module preconditions without computing
/// anything. Throws ConfigError.
void validate_config(const ExperimentConfig& cfg);

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitInsufficientSignal = 3;

/// Validates, runs, and writes CSV files, summary.json and plot.gp into
/// cfg.out. Diagnostics go to `log`. Returns 0, 2 or 3.
int run_experiment(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace qml
