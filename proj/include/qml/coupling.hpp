#pragma once

#include <cstdint>
#include <ostream>
#include <string_view>
#include <vector>

#include "qml/environment.hpp"
#include "qml/parallel.hpp"

namespace qml {

/// Return-time law of the abstract tower, truncated at `cap` and
/// renormalized. Survival functions S(n) = P{R > n}:
///   exponential(c):        exp(-c n)
///   stretched(c, theta):   exp(-c n^theta)
///   polynomial(a):         (1 + n)^-a
///   deterministic(r):      R = r almost surely
class TailLaw {
 public:
  enum class Kind { exponential, stretched, polynomial, deterministic };

  static TailLaw exponential(double c, int cap);
  static TailLaw stretched(double c, double theta, int cap);
  static TailLaw polynomial(double a, int cap);
  static TailLaw deterministic(int r);

  /// "exponential:c", "stretched:c,theta", "polynomial:a" or "deterministic:r".
  /// Throws ArgumentError on malformed input.
  static TailLaw parse(std::string_view text, int cap);

  Kind kind() const { return kind_; }
  int cap() const { return cap_; }

  /// P{R = n}, n = 1..cap, after truncation.
  double pmf(int n) const;
  /// P{R > n} after truncation.
  double survival(int n) const;
  double mean() const;

  /// Inverse-CDF draw from 64 random bits.
  int draw(std::uint64_t bits) const;

 private:
  TailLaw(Kind kind, int cap, std::vector<double> untruncated_survival);

  Kind kind_;
  int cap_;
  std::vector<double> cdf_;  // cdf_[n-1] = P{R <= n}
};

/// Return-time stream of one tower orbit: level 0 at times 0, R_1,
/// R_1 + R_2, ...; the R_i are drawn from the law with counter-based bits
/// keyed on (seed, pair, orbit).
class TowerWalker {
 public:
  TowerWalker(const TailLaw& law, std::uint64_t seed, std::uint64_t key);

  /// First time >= t at which the orbit is on the base.
  std::int64_t next_return_at_or_after(std::int64_t t);
  /// True if the orbit is on the base at time t. t must not decrease
  /// between calls below the last queried return.
  bool on_base(std::int64_t t);

 private:
  void advance();

  const TailLaw* law_;
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::int64_t draws_ = 0;
  std::int64_t last_return_ = 0;  // most recent base time generated
};

/// Levels of one tower orbit for `length` steps starting on the base.
std::vector<int> sample_tower_orbit(const Environment& env, const TailLaw& law, std::int64_t length,
                                    std::uint64_t key = 0);

struct CouplingRun {
  int ell0 = 0;
  std::int64_t pairs = 0;
  std::int64_t horizon = 0;
  int levels = 0;
  double eps1 = 0.5;
  /// tau_1 < tau_2 < ... up to the first coupling, for the first
  /// `recorded_pairs` pairs.
  std::vector<std::vector<std::int64_t>> tau_records;
  /// Coupling index i (>= 2) with T = tau_i, per recorded pair; 0 if censored.
  std::vector<int> coupling_index;
  /// T_1 per pair; horizon + 1 when censored.
  std::vector<std::int64_t> T_samples;
  /// Ti_tail[i-1][n] = P{T_i > n}, n = 0..horizon, i = 1..levels.
  std::vector<std::vector<double>> Ti_tail;
};

struct CouplingOptions {
  int levels = 16;                 // number of iterated stopping times tracked
  std::int64_t recorded_pairs = 64;
  Exec exec = Exec::parallel;
};

/// Two independent tower orbits per pair, both starting on the base.
///   tau_1 = first base return of orbit 1 at time >= ell0,
///   tau_{i+1} = first base return of the other orbit at time >= tau_i + ell0,
///   T = first tau_i (i >= 2) at which both orbits are on the base.
/// After each coupling the construction restarts from T_i, giving
/// T_1 < T_2 < ...; everything beyond the horizon is censored.
CouplingRun run_coupling(const Environment& env, const TailLaw& law, std::int64_t pairs,
                         std::int64_t horizon, int ell0, const CouplingOptions& opts = {});

/// sum_i eps1^i P{T_i <= n < T_{i+1}} for n = 0..horizon, with T_0 = 0 and
/// the last tracked level absorbing everything after it.
std::vector<double> uncoupled_mass_curve(const CouplingRun& run, double eps1);

/// pair_id,tau_index,tau_value
void write_tau_csv(std::ostream& out, const CouplingRun& run);
/// n,uncoupled_mass
void write_mass_csv(std::ostream& out, const std::vector<double>& curve);

}  // namespace qml
