#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qml/environment.hpp"
#include "qml/maps.hpp"
#include "qml/orbits.hpp"
#include "qml/parallel.hpp"

namespace qml {

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

/// Built-in observables, all bounded by 1 in absolute value. Circle-type
/// observables read the circle coordinate (x, or u on the torus).
///   constant               1
///   smooth_cos             cos 2 pi x
///   holder_cusp(eta)       |x - 1/2|^eta
///   fiber_y                y                      (solenoid only)
///   indicator_halfcircle   1{x < 1/2}
///   torus_lacunary(eta)    normalized sum_m L^{-m eta} cos 2 pi <k_m, p>,
///                          k_{m+1} = A k_m, A = ((2,1),(1,1)), L = (3+sqrt5)/2
///                          (torus only; Hoelder exponent eta)
class Observable {
 public:
  enum class Kind { constant, smooth_cos, holder_cusp, fiber_y, indicator_halfcircle, torus_lacunary };

  static Observable constant() { return Observable(Kind::constant, 1.0); }
  static Observable smooth_cos() { return Observable(Kind::smooth_cos, 1.0); }
  static Observable holder_cusp(double eta);
  static Observable fiber_y() { return Observable(Kind::fiber_y, 1.0); }
  static Observable indicator_halfcircle() { return Observable(Kind::indicator_halfcircle, 1.0); }
  static Observable torus_lacunary(double eta);

  /// "const", "cos", "cusp:<eta>", "fiber_y", "half", "lacunary:<eta>".
  static Observable parse(std::string_view text);

  Kind kind() const { return kind_; }
  double eta() const { return eta_; }
  std::string name() const;

  /// Throws ArgumentError if the observable is not defined on the family.
  void check_family(Family f) const;
  /// False when the value only depends on the circle coordinate.
  bool depends_on_fiber() const { return kind_ == Kind::fiber_y || kind_ == Kind::torus_lacunary; }

  double operator()(CirclePoint p) const { return on_circle(p.x); }
  double operator()(SolenoidPoint p) const { return kind_ == Kind::fiber_y ? p.y : on_circle(p.x); }
  double operator()(TorusPoint p) const;

  static constexpr int kLacunaryModes = 20;

 private:
  Observable(Kind kind, double eta) : kind_(kind), eta_(eta) {}
  double on_circle(double x) const;

  Kind kind_;
  double eta_;
  std::vector<double> weights_;  // torus_lacunary only
};

// ---------------------------------------------------------------------------
// Equivariant measure approximation
// ---------------------------------------------------------------------------

/// Sample i of the reference measure: Lebesgue on S^1 (circle), on
/// S^1 x {(0,0)} (solenoid) or on T^2 (cat map). Pure function of (seed, i).
template <class F>
typename F::point_type reference_point(const Environment& env, std::int64_t i) {
  const double a = unit_interval(env.stream_bits(streams::initial_points, 2 * i));
  if constexpr (F::id == Family::perturbed_cat) {
    return TorusPoint{a, unit_interval(env.stream_bits(streams::initial_points, 2 * i + 1))};
  } else if constexpr (F::id == Family::solenoid) {
    return SolenoidPoint{a, 0.0, 0.0};
  } else {
    return CirclePoint{a};
  }
}

/// N reference points pushed through f^m_{sigma^{-m} omega}.
template <class F>
std::vector<typename F::point_type> attractor_sample(const Environment& env, std::int64_t m,
                                                     std::int64_t N, Exec exec = Exec::parallel) {
  std::vector<typename F::point_type> out(static_cast<std::size_t>(N));
  if (exec == Exec::serial) {
    for (std::int64_t i = 0; i < N; ++i)
      out[static_cast<std::size_t>(i)] = pullback<F>(env, reference_point<F>(env, i), m);
  } else {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < N; ++i)
      out[static_cast<std::size_t>(i)] = pullback<F>(env, reference_point<F>(env, i), m);
  }
  return out;
}

/// Runtime-dispatched variant. Throws ArgumentError unless m >= 1 and N >= 1.
std::vector<AnyPoint> attractor_sample(const Environment& env, Family family, std::int64_t m,
                                       std::int64_t N, Exec exec = Exec::parallel);

// ---------------------------------------------------------------------------
// Quenched correlations
// ---------------------------------------------------------------------------

struct CorrelationMeta {
  std::uint64_t seed = 0;
  std::string law;
  Family family = Family::solenoid;
  std::int64_t burnin = 0;
  std::int64_t samples = 0;
  std::string phi;
  std::string psi;
};

struct CorrelationSeries {
  std::vector<std::int64_t> lags;  // 0..n_max
  std::vector<double> values;      // C_hat_n
  std::vector<double> std_error;   // batch-means standard error
  CorrelationMeta meta;
};

struct CorrelationRequest {
  Environment env;
  Family family = Family::solenoid;
  Observable phi = Observable::smooth_cos();
  Observable psi = Observable::smooth_cos();
  std::int64_t n_max = 1;
  std::int64_t burnin = 0;  // 0 selects max(100, 2 n_max)
  std::int64_t samples = 1;
  Exec exec = Exec::parallel;
};

inline constexpr int kBatches = 32;

std::int64_t default_burnin(std::int64_t n_max);

/// C_hat_n = mean[phi(f^n x_i) psi(x_i)] - mean[phi(f^n x_i)] mean[psi(x_i)]
/// over the pullback sample, n = 0..n_max. Sums are exact (FixedSum), so
/// the values do not depend on the worker count.
CorrelationSeries quenched_correlation(const CorrelationRequest& req);

/// Same estimator over caller-supplied points (already distributed as
/// mu_omega). Batches are contiguous blocks of the given order.
template <class F>
CorrelationSeries correlation_from_points(const Environment& env, const Observable& phi,
                                          const Observable& psi, std::int64_t n_max,
                                          std::span<const typename F::point_type> points,
                                          Exec exec = Exec::parallel);

// ---------------------------------------------------------------------------
// Rate fits
// ---------------------------------------------------------------------------

enum class RateModel { polynomial, exponential, stretched };

RateModel parse_rate_model(std::string_view s);
std::string_view rate_model_name(RateModel m);

struct RateFit {
  RateModel model = RateModel::polynomial;
  double exponent = 0.0;   // slope of log|C| against the regressor
  double prefactor = 0.0;  // exp(intercept)
  double r2 = 0.0;
  std::pair<std::int64_t, std::int64_t> window{0, 0};  // first and last lag used
  double theta = 1.0;      // stretched model only
  std::int64_t points = 0;
};

/// Least squares of log y against log n (polynomial), n (exponential) or
/// n^theta (stretched; theta profiled over 0.1, 0.2, ..., 1.0). Pairs with
/// n <= 0 or y <= 0 are skipped. Throws ArgumentError with fewer than 2 usable
/// points.
RateFit fit_log_model(std::span<const double> n, std::span<const double> y, RateModel model);

/// Fit over lags in [window.first, window.second] (default: all lags >= 1)
/// with |C_hat_n| > 2 std_error_n. Throws InsufficientSignal with fewer than
/// 10 such lags.
RateFit fit_rate(const CorrelationSeries& series, RateModel model,
                 std::optional<std::pair<std::int64_t, std::int64_t>> window = std::nullopt);

inline constexpr int kMinSignalLags = 10;

// ---------------------------------------------------------------------------
// Expansion-time tails
// ---------------------------------------------------------------------------

/// count starts spread evenly over the reference measure's support.
std::vector<AnyPoint> uniform_start_grid(Family family, std::int64_t count);

/// (n, fraction of starts whose expansion time exceeds n), n = 0..horizon.
/// Starts without an expansion time within the horizon count at every n.
/// Throws ArgumentError with fewer than 1000 starts.
std::vector<std::pair<std::int64_t, double>> expansion_tail(const Environment& env, Family family,
                                                            std::span<const AnyPoint> starts,
                                                            std::int64_t horizon, double c,
                                                            Exec exec = Exec::parallel);

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

/// n,C_hat,stderr
void write_correlation_csv(std::ostream& out, const CorrelationSeries& s);
/// {"model", "exponent", "prefactor", "r2", "window"} (+ "theta" for stretched)
std::string rate_fit_json(const RateFit& fit);

}  // namespace qml
