#include "qml/parallel.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qml {

namespace {
int default_workers() {
#ifdef _OPENMP
  return omp_get_num_procs();
#else
  return 1;
#endif
}
}  // namespace

int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_worker_count(int n) {
#ifdef _OPENMP
  omp_set_num_threads(n >= 1 ? n : default_workers());
#else
  (void)n;
#endif
}

__int128 FixedSum::to_fixed(double v) {
  return static_cast<__int128>(std::nearbyint(std::ldexp(v, kFractionBits)));
}

double FixedSum::value() const {
  // Split so the conversion of the 128-bit word stays exact in the high part.
  const __int128 hi = acc_ >> 64;
  const unsigned __int128 lo = static_cast<unsigned __int128>(acc_) & ~std::uint64_t{0};
  const long double v = std::ldexp(static_cast<long double>(hi), 64) +
                        static_cast<long double>(static_cast<std::uint64_t>(lo));
  return static_cast<double>(std::ldexp(v, -kFractionBits));
}

}  // namespace qml
