#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <vector>

#include "qml/environment.hpp"
#include "qml/parallel.hpp"

namespace qml {

// Random return partition of the intermittent circle map.
//
// x_1 = 1/2 and x_n(w) = (T_{w_0}|left)^{-1} x_{n-1}(sigma w), so
//   x_n(w) = h_{w_0}^{-1} o ... o h_{w_{n-2}}^{-1}(1/2)
// with h the branch profile. Because T(1 - x) = 1 - T(x), the plus-side
// preimages are reflections: x_n^+ = 1 - x_n^-.
//
// Cells:  I_n^- = (x_n^-, x_{n-1}^-),  I_n^+ = (x_{n-1}^+, x_n^+),  n >= 2.
// T^{n-1} maps I_n^- onto (1/2, 1) and I_n^+ onto (0, 1/2); one more step
// covers (0, 1), so the return time of both cells is n.

enum class Side { minus, plus };

struct Cell {
  double lo;
  double hi;
  double length;  // computed from the preimages directly, not hi - lo
  int n;
  int return_time;
  Side side;
};

struct ReturnPartition {
  Environment env;
  int max_n = 0;
  std::vector<double> x_minus;  // x_minus[n-1] = x_n^-, n = 1..max_n
  std::vector<Cell> cells;      // minus cells n=2..max_n, then plus cells

  std::uint64_t env_seed() const { return env.seed(); }
  double minus_at(int n) const { return x_minus.at(static_cast<std::size_t>(n - 1)); }
  /// 1 - x_n^+, kept as its own quantity for precision near x = 1.
  double plus_complement_at(int n) const { return minus_at(n); }
  double plus_at(int n) const { return 1.0 - minus_at(n); }
};

/// Preimage ladder x_n^-(env) for one environment, extended on demand.
class PreimageLadder {
 public:
  explicit PreimageLadder(Environment env);
  /// x_n^-(env), n >= 1.
  double at(int n);
  const Environment& env() const { return env_; }

 private:
  Environment env_;
  bool dirac_;
  std::vector<double> xs_;
};

/// Single preimage chain: h_{w_0}^{-1} o ... o h_{w_{n-2}}^{-1}(1/2).
double preimage_of_half(const Environment& env, int n);

ReturnPartition build_partition(const Environment& env, int max_n, Exec exec = Exec::parallel);

/// Leb{R > m} = x_m^- + (1 - x_m^+), for 1 <= m <= max_n.
double tail_measure(const ReturnPartition& p, int m);

/// Sum of all cell lengths plus tail_measure(max_n). Equals 1 up to rounding.
double total_mass(const ReturnPartition& p);

/// Largest one-step residual along the preimage chains of the endpoints of
/// I_n^- and I_n^+: |T_{w_j}(c_j) - c_{j+1}|, plus the distance between the
/// stored endpoint and the recomputed chain start. Zero for n = 1.
double markov_check(const ReturnPartition& p, int n);

/// Result of one induced step F = T^R.
struct InducedStep {
  double image;       // F(x)
  double log_deriv;   // log (T^R)'(x)
  int return_time;    // R(x), 0 if x is deeper than the ladder reaches
};

/// Cell locator and induced map over shifted environments. Separation
/// times are read off cell indices found by searching the preimage
/// ladders, never by comparing floating orbits to 1/2.
class InducedMap {
 public:
  InducedMap(Environment env, int max_n);

  /// Cell index n (signed: negative for the minus side) of x at sigma^offset
  /// env; 0 when x lies beyond depth max_n.
  int cell_of(std::int64_t offset, double x);
  InducedStep step(std::int64_t offset, double x);

  /// Number of induced iterates during which x and y share cells, capped at
  /// s_max. 0 when they start in different cells.
  int separation_time(double x, double y, int s_max);

  PreimageLadder& ladder(std::int64_t offset);
  int max_n() const { return max_n_; }

 private:
  Environment env_;
  int max_n_;
  std::map<std::int64_t, PreimageLadder> ladders_;
};

struct DistortionReport {
  double C_hat = 0.0;
  double beta_hat = 0.0;
  std::vector<double> max_by_separation;  // index s = s(Fx, Fy)
  int pairs = 0;
};

/// Samples pairs in common cells, records |log (F'x / F'y)| against the
/// separation time of the images and fits the envelope C beta^s.
DistortionReport distortion_report(const ReturnPartition& p, int samples, std::uint64_t seed = 1,
                                   int ladder_depth = 400);

struct CellDiameter {
  double value;          // max(10^-k, quotient part)
  double quotient_part;  // largest tracked cell image diameter
  bool truncated;        // k + 1 > max_n: cells beyond max_n were ignored
};

/// Upper envelope for delta_{sigma^k w, k}: max(10^-k, sup diam of the
/// projections of the k-step images of depth-2k quotient cells). Elements
/// still climbing project onto whole return cells I_m with m > j; elements
/// that return within the window are exact pullbacks of the largest tracked
/// element at the later fibre.
CellDiameter cell_diameter(const Environment& env, int k, int max_n = 400);

/// CSV with header n,side,lo,hi,return_time and 17 significant digits.
void write_partition_csv(std::ostream& out, const ReturnPartition& p);

}  // namespace qml
