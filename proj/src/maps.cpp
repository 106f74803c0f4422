#include "qml/maps.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qml/errors.hpp"

namespace qml {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Distance from the branch's fixed-point end: x on the left, 1 - x on the right.
inline double branch_offset(double x) { return x < 0.5 ? x : 1.0 - x; }

}  // namespace

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("alpha must lie in (0,1), got " + std::to_string(alpha));
}

double wrap_unit(double x) {
  const double r = x - std::floor(x);
  return r < 1.0 ? r : 0.0;
}

CirclePoint eval_T(double alpha, CirclePoint p) {
  check_alpha(alpha);
  const double x = p.x;
  if (x < 0.5) {
    const double y = x + x * std::pow(2.0 * x, alpha);
    return {y < 1.0 ? y : y - 1.0};
  }
  const double u = 1.0 - x;
  return {wrap_unit(x - u * std::pow(2.0 * u, alpha))};
}

double deriv_T(double alpha, CirclePoint p) {
  check_alpha(alpha);
  return 1.0 + (1.0 + alpha) * std::pow(2.0 * branch_offset(p.x), alpha);
}

double log_deriv_T(double alpha, double x) {
  return std::log1p((1.0 + alpha) * std::pow(2.0 * branch_offset(x), alpha));
}

double branch_profile_inverse(double alpha, double target) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("branch profile needs alpha in (0,1]");
  if (!(target >= 0.0 && target <= 1.0)) throw RangeError("branch profile target outside [0,1]");
  if (target == 0.0) return 0.0;
  double s = std::min(target, 0.5);
  for (int it = 0; it < 200; ++it) {
    const double p = std::pow(2.0 * s, alpha);
    const double f = s * (1.0 + p) - target;
    if (f <= 0.0) break;
    const double next = s - f / (1.0 + (1.0 + alpha) * p);
    if (!(next < s)) break;
    s = next;
  }
  return s;
}

CirclePoint invert_branch(double alpha, CirclePoint y, Branch branch) {
  check_alpha(alpha);
  if (!(y.x >= 0.0 && y.x < 1.0))
    throw RangeError("invert_branch: y = " + std::to_string(y.x) + " outside [0,1)");
  if (branch == Branch::left) return {branch_profile_inverse(alpha, y.x)};
  return {1.0 - branch_profile_inverse(alpha, 1.0 - y.x)};
}

SolenoidPoint eval_g(double alpha, SolenoidPoint p) {
  const double t = eval_T(alpha, {p.x}).x;
  const double angle = kTwoPi * p.x;
  return {t, kFiberRate * p.y + kFiberOffset * std::cos(angle),
          kFiberRate * p.z + kFiberOffset * std::sin(angle)};
}

Matrix3 jacobian_g(double alpha, SolenoidPoint p) {
  const double angle = kTwoPi * p.x;
  const double amp = kFiberOffset * kTwoPi;
  Matrix3 m{};
  m[0] = {deriv_T(alpha, {p.x}), 0.0, 0.0};
  m[1] = {-amp * std::sin(angle), kFiberRate, 0.0};
  m[2] = {amp * std::cos(angle), 0.0, kFiberRate};
  return m;
}

double fiber_distance(SolenoidPoint a, SolenoidPoint b) { return std::hypot(a.y - b.y, a.z - b.z); }

ConeState ConeState::from_bounds(double s2_lo, double s2_hi, double s3_lo, double s3_hi) {
  if (!(s2_lo <= s2_hi && s3_lo <= s3_hi)) throw ArgumentError("cone box bounds out of order");
  return {0.5 * (s2_lo + s2_hi), 0.5 * (s2_hi - s2_lo), 0.5 * (s3_lo + s3_hi),
          0.5 * (s3_hi - s3_lo)};
}

double ConeState::width() const { return 2.0 * std::max(s2_rad, s3_rad); }

bool ConeState::contains(const ConeState& o) const {
  return s2_lo() <= o.s2_lo() && o.s2_hi() <= s2_hi() && s3_lo() <= o.s3_lo() &&
         o.s3_hi() <= s3_hi();
}

ConeState initial_cone() { return {0.0, kConeHalfWidth, 0.0, kConeHalfWidth}; }

ConeState cone_push(double alpha, CirclePoint x, const ConeState& c) {
  const double d = deriv_T(alpha, x);
  const double angle = kTwoPi * x.x;
  const double amp = kFiberOffset * kTwoPi;
  const double a2 = -amp * std::sin(angle);
  const double a3 = amp * std::cos(angle);
  // s -> (a + s/10)/d is affine and increasing: centres map to centres and
  // radii scale by 1/(10 d).
  const double shrink = kFiberRate / d;
  return {(a2 + kFiberRate * c.s2_mid) / d, c.s2_rad * shrink, (a3 + kFiberRate * c.s3_mid) / d,
          c.s3_rad * shrink};
}

TorusPoint eval_perturbed_cat(double eps_u, double eps_v, TorusPoint p) {
  if (!(std::abs(eps_u) <= kCatPerturbationBound && std::abs(eps_v) <= kCatPerturbationBound))
    throw DomainError("cat map perturbation exceeds 0.05");
  return {wrap_unit(2.0 * p.u + p.v + eps_u), wrap_unit(p.u + p.v + eps_v)};
}

}  // namespace qml
