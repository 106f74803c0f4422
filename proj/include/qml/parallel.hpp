#pragma once

#include <cstdint>

namespace qml {

/// Execution policy for the data-parallel kernels. `serial` runs the plain
/// reference loop; `parallel` runs the OpenMP kernel. Both produce
/// bit-identical results: parallel kernels only reduce through exact
/// (integer or fixed-point) accumulators or fixed-order merges.
enum class Exec { serial, parallel };

/// Number of OpenMP workers used by parallel kernels (1 without OpenMP).
int worker_count();

/// Sets the worker count; values < 1 restore the runtime default.
void set_worker_count(int n);

/// Exact, order-independent accumulator for values with |v| <= 2^20.
/// Each value is rounded once to a multiple of 2^-80 and summed in a
/// 128-bit integer, so the sum does not depend on summation order.
class FixedSum {
 public:
  static constexpr int kFractionBits = 80;

  void add(double v) { acc_ += to_fixed(v); }
  void merge(const FixedSum& o) { acc_ += o.acc_; }
  double value() const;

  static __int128 to_fixed(double v);

 private:
  __int128 acc_ = 0;
};

}  // namespace qml
