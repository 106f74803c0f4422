#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qml/environment.hpp"
#include "qml/orbits.hpp"

namespace qml {

/// Hyperbolic times of one trace over a finite horizon.
struct HyperbolicTimeReport {
  std::vector<std::int64_t> times;  // strictly increasing, 1-based
  double density_lower_bound = 0.0;  // |times| / horizon
  std::optional<std::int64_t> expansion_time;
};

/// All n in 1..trace.size() with
///   sum_{j=n-k+1}^{n} trace_j <= k * log_alpha   for every k = 1..n.
/// With S_n = sum_{j<=n} (trace_j - log_alpha) the condition reads
/// S_n <= min_{0<=i<n} S_i, so one pass with a running minimum suffices.
/// Ties count as hyperbolic. Throws ArgumentError if log_alpha >= 0.
std::vector<std::int64_t> pliss_times(std::span<const double> trace, double log_alpha);

/// Smallest N such that (1/n) sum_{j<=n} trace_j < -c for all N <= n <= size.
/// Empty when the last average still violates the bound (the expansion time
/// exceeds the horizon). Throws ArgumentError if c <= 0.
std::optional<std::int64_t> expansion_time(std::span<const double> trace, double c);

HyperbolicTimeReport analyze_trace(std::span<const double> trace, double log_alpha, double c);

/// Fraction of 1..horizon that are hyperbolic times for the orbit of start.
double density_estimate(const Environment& env, Family family, const AnyPoint& start,
                        std::int64_t horizon, double log_alpha);

/// Pliss lower bound on the density of hyperbolic times for a trace whose
/// Birkhoff average is <= -c and whose entries satisfy |entry| <= max_abs:
///   (c - |log_alpha|) / (max_abs - |log_alpha|).
/// Requires 0 < |log_alpha| < c <= max_abs.
double pliss_density_bound(double c, double log_alpha, double max_abs);

}  // namespace qml
