#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include "qml/environment.hpp"
#include "qml/maps.hpp"

namespace qml {

enum class Family { intermittent_circle, solenoid, perturbed_cat };
enum class OrbitMode { forward, pullback };

Family parse_family(std::string_view name);
std::string_view family_name(Family f);

// ---------------------------------------------------------------------------
// Family traits. Each provides the point type, one random step
// f_{omega_k}, and the log of the inverse expansion along E^cu.
// ---------------------------------------------------------------------------

struct CircleFamily {
  using point_type = CirclePoint;
  static constexpr Family id = Family::intermittent_circle;
  static void validate(const Environment& env);
  static point_type step(const Environment& env, std::int64_t k, point_type p) {
    return eval_T(env.param_at(k), p);
  }
  static double log_inverse_expansion(const Environment& env, std::int64_t k, point_type p) {
    return -log_deriv_T(env.param_at(k), p.x);
  }
  static double circle_coordinate(point_type p) { return p.x; }
};

/// For the solenoid the centre-unstable expansion is measured along the base
/// coordinate (log T'), which differs from the true E^cu rate by a bounded
/// cocycle because the slopes of E^cu stay in the invariant cone box.
struct SolenoidFamily {
  using point_type = SolenoidPoint;
  static constexpr Family id = Family::solenoid;
  static void validate(const Environment& env);
  static point_type step(const Environment& env, std::int64_t k, point_type p) {
    return eval_g(env.param_at(k), p);
  }
  static double log_inverse_expansion(const Environment& env, std::int64_t k, point_type p) {
    return -log_deriv_T(env.param_at(k), p.x);
  }
  static double circle_coordinate(point_type p) { return p.x; }
};

/// Parameters are (param_at(k, 0), param_at(k, 1)) as the translation vector.
struct CatFamily {
  using point_type = TorusPoint;
  static constexpr Family id = Family::perturbed_cat;
  static void validate(const Environment& env);
  static point_type step(const Environment& env, std::int64_t k, point_type p) {
    return eval_perturbed_cat(env.param_at(k, 0), env.param_at(k, 1), p);
  }
  static double log_inverse_expansion(const Environment&, std::int64_t, point_type) {
    return -std::log(kCatUnstableEigenvalue);
  }
  static double circle_coordinate(point_type p) { return p.u; }
};

/// Dispatches a callable on the traits type for a runtime family tag.
template <class Fn>
decltype(auto) visit_family(Family f, Fn&& fn) {
  switch (f) {
    case Family::intermittent_circle:
      return fn(CircleFamily{});
    case Family::solenoid:
      return fn(SolenoidFamily{});
    case Family::perturbed_cat:
      break;
  }
  return fn(CatFamily{});
}

// ---------------------------------------------------------------------------
// Typed orbit kernels
// ---------------------------------------------------------------------------

/// (x, f_w x, ..., f_w^n x) using w_0..w_{n-1}. Pullback mode composes
/// w_{-n}..w_{-1}, i.e. it is the forward orbit of shift(env, -n).
template <class F>
std::vector<typename F::point_type> orbit(const Environment& env, typename F::point_type start,
                                          std::int64_t length, OrbitMode mode = OrbitMode::forward) {
  const Environment e = mode == OrbitMode::forward ? env : env.shift(-length);
  std::vector<typename F::point_type> out;
  out.reserve(static_cast<std::size_t>(length) + 1);
  out.push_back(start);
  for (std::int64_t k = 0; k < length; ++k) out.push_back(F::step(e, k, out.back()));
  return out;
}

/// Streaming variant: calls visit(k, point) for k = 0..length and returns
/// the final point, without materializing the orbit.
template <class F, class Visit>
typename F::point_type fold_orbit(const Environment& env, typename F::point_type p,
                                  std::int64_t length, Visit&& visit) {
  visit(std::int64_t{0}, p);
  for (std::int64_t k = 0; k < length; ++k) {
    p = F::step(env, k, p);
    visit(k + 1, p);
  }
  return p;
}

/// f^m_{sigma^{-m} omega}(p): pushes p through w_{-m}..w_{-1}.
template <class F>
typename F::point_type pullback(const Environment& env, typename F::point_type p, std::int64_t m) {
  for (std::int64_t k = -m; k < 0; ++k) p = F::step(env, k, p);
  return p;
}

/// log ||Df^{-1}|E^cu|| evaluated along the forward orbit, j = 0..length-1.
template <class F>
std::vector<double> trace(const Environment& env, typename F::point_type p, std::int64_t length) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(length));
  for (std::int64_t k = 0; k < length; ++k) {
    out.push_back(F::log_inverse_expansion(env, k, p));
    p = F::step(env, k, p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Runtime request interface
// ---------------------------------------------------------------------------

using AnyPoint = std::variant<CirclePoint, SolenoidPoint, TorusPoint>;

struct OrbitRequest {
  Environment env;
  Family family;
  AnyPoint start;
  std::int64_t length = 0;
  OrbitMode mode = OrbitMode::forward;
};

struct CocycleTrace {
  std::vector<double> log_inverse_expansion;
};

/// Validates family/point agreement, point invariants and the environment's
/// parameter support. Throws ArgumentError or DomainError.
void validate(const OrbitRequest& req);

std::vector<AnyPoint> run_orbit(const OrbitRequest& req);

/// Forward mode only (ArgumentError otherwise).
CocycleTrace cocycle_trace(const OrbitRequest& req);

}  // namespace qml
