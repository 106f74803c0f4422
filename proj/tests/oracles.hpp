#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's numerical kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

// Closed-form intermittent map in long double.
inline long double T(long double a, long double x) {
  if (x < 0.5L) return x * (1.0L + std::pow(2.0L * x, a));
  return x - std::pow(2.0L, a) * std::pow(1.0L - x, 1.0L + a);
}

// Left branch profile h(s) = s (1 + (2s)^a) on [0, 1/2].
inline long double profile(long double a, long double s) { return s * (1.0L + std::pow(2.0L * s, a)); }

// Plain bisection for h(s) = t on [0, 1/2].
inline long double profile_inverse(long double a, long double t, int iterations = 200) {
  long double lo = 0.0L, hi = 0.5L;
  for (int i = 0; i < iterations; ++i) {
    const long double mid = 0.5L * (lo + hi);
    (profile(a, mid) < t ? lo : hi) = mid;
  }
  return 0.5L * (lo + hi);
}

// x in the chosen branch with T(x) = y, by bisection on the branch domain.
inline long double invert(long double a, long double y, bool right) {
  long double lo = right ? 0.5L : 0.0L, hi = right ? 1.0L : 0.5L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    (T(a, mid) < y ? lo : hi) = mid;
  }
  return 0.5L * (lo + hi);
}

// Central finite difference.
inline double derivative(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Definitional O(n^2) hyperbolic-time check.
inline std::vector<std::int64_t> pliss_brute(const std::vector<double>& trace, double log_alpha) {
  std::vector<std::int64_t> out;
  for (std::size_t n = 1; n <= trace.size(); ++n) {
    bool ok = true;
    double sum = 0.0;
    for (std::size_t k = 1; k <= n && ok; ++k) {
      sum += trace[n - k];
      ok = sum <= static_cast<double>(k) * log_alpha;
    }
    if (ok) out.push_back(static_cast<std::int64_t>(n));
  }
  return out;
}

// Smallest N with avg_n < -c for every n in [N, len]; -1 if none.
inline std::int64_t expansion_scan(const std::vector<double>& trace, double c) {
  const auto len = static_cast<std::int64_t>(trace.size());
  for (std::int64_t N = 1; N <= len; ++N) {
    bool ok = true;
    double sum = 0.0;
    for (std::int64_t n = 1; n <= len; ++n) {
      sum += trace[static_cast<std::size_t>(n - 1)];
      if (n >= N && !(sum / static_cast<double>(n) < -c)) ok = false;
    }
    if (ok) return N;
  }
  return -1;
}

// Kolmogorov-Smirnov distance of a sample from a continuous cdf.
inline double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const auto n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

// Wasserstein-1 distance between two equal-size samples on the line.
inline double wasserstein1(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

// Ordinary least-squares slope.
inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxx += (x[i] - mx) * (x[i] - mx), sxy += (x[i] - mx) * (y[i] - my);
  return sxy / sxx;
}

}  // namespace oracle
