#include "qml/hyperbolic_times.hpp"

#include <cmath>

#include "qml/errors.hpp"

namespace qml {

std::vector<std::int64_t> pliss_times(std::span<const double> trace, double log_alpha) {
  if (!(log_alpha < 0.0)) throw ArgumentError("log_alpha must be negative");
  std::vector<std::int64_t> out;
  double running = 0.0;   // S_n
  double minimum = 0.0;   // min_{i<n} S_i, starting with S_0 = 0
  for (std::size_t n = 1; n <= trace.size(); ++n) {
    running += trace[n - 1] - log_alpha;
    if (running <= minimum) {
      out.push_back(static_cast<std::int64_t>(n));
      minimum = running;
    }
  }
  return out;
}

std::optional<std::int64_t> expansion_time(std::span<const double> trace, double c) {
  if (!(c > 0.0)) throw ArgumentError("expansion constant c must be positive");
  const auto len = static_cast<std::int64_t>(trace.size());
  std::int64_t last_violation = 0;
  double sum = 0.0;
  for (std::int64_t n = 1; n <= len; ++n) {
    sum += trace[static_cast<std::size_t>(n - 1)];
    if (!(sum / static_cast<double>(n) < -c)) last_violation = n;
  }
  if (len == 0 || last_violation == len) return std::nullopt;
  return last_violation + 1;
}

HyperbolicTimeReport analyze_trace(std::span<const double> trace, double log_alpha, double c) {
  HyperbolicTimeReport r;
  r.times = pliss_times(trace, log_alpha);
  r.density_lower_bound =
      trace.empty() ? 0.0 : static_cast<double>(r.times.size()) / static_cast<double>(trace.size());
  r.expansion_time = expansion_time(trace, c);
  return r;
}

double density_estimate(const Environment& env, Family family, const AnyPoint& start,
                        std::int64_t horizon, double log_alpha) {
  if (horizon < 1) throw ArgumentError("horizon must be at least 1");
  const auto tr = cocycle_trace(OrbitRequest{env, family, start, horizon, OrbitMode::forward});
  const auto times = pliss_times(tr.log_inverse_expansion, log_alpha);
  return static_cast<double>(times.size()) / static_cast<double>(horizon);
}

double pliss_density_bound(double c, double log_alpha, double max_abs) {
  const double a = std::abs(log_alpha);
  if (!(a > 0.0 && a < c && c <= max_abs))
    throw ArgumentError("Pliss bound needs 0 < |log_alpha| < c <= max_abs");
  return (c - a) / (max_abs - a);
}

}  // namespace qml
