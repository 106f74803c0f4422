#pragma once

#include <array>
#include <numbers>

namespace qml {

struct CirclePoint {
  double x;  // [0, 1)
};

/// Point of the solid torus S^1 x D^2.
struct SolenoidPoint {
  double x;  // [0, 1)
  double y;
  double z;
};

struct TorusPoint {
  double u;  // [0, 1)
  double v;  // [0, 1)
};

enum class Branch { left, right };

using Matrix3 = std::array<std::array<double, 3>, 3>;

// ---------------------------------------------------------------------------
// Intermittent circle map
//   T_a(x) = x (1 + (2x)^a)            on [0, 1/2)
//   T_a(x) = x - 2^a (1 - x)^(1 + a)   on [1/2, 1)
// Both branches are increasing and onto [0, 1); T_a(1 - x) = 1 - T_a(x).
// ---------------------------------------------------------------------------

/// Throws DomainError unless 0 < alpha < 1.
void check_alpha(double alpha);

CirclePoint eval_T(double alpha, CirclePoint p);
double deriv_T(double alpha, CirclePoint p);

/// log T'_a(x), accurate near the neutral fixed point.
double log_deriv_T(double alpha, double x);

/// Inverse branch of T_a. The left branch maps [0,1/2) onto [0,1) and the
/// right branch maps [1/2,1) onto [0,1), so y must lie in [0,1) for both.
CirclePoint invert_branch(double alpha, CirclePoint y, Branch branch);

/// Inverse of the branch profile h(s) = s (1 + (2s)^a) on [0, 1/2].
/// The left inverse branch is h^{-1}(y); the right one is 1 - h^{-1}(1 - y).
/// Works on complements directly, so 1 - x near the fixed point at 1 keeps
/// full relative precision. Accepts alpha in (0, 1] and target in [0, 1].
/// Newton from above on a convex increasing function: iterates decrease
/// monotonically to the root, so the loop stops once they stall.
double branch_profile_inverse(double alpha, double target);

// ---------------------------------------------------------------------------
// Solenoid skew product
//   g_a(x,y,z) = (T_a(x), y/10 + cos(2 pi x)/2, z/10 + sin(2 pi x)/2)
// The circle coordinate x in [0,1) enters the trigonometric terms as the
// angle 2 pi x.
// ---------------------------------------------------------------------------

inline constexpr double kFiberRate = 0.1;
inline constexpr double kFiberOffset = 0.5;

SolenoidPoint eval_g(double alpha, SolenoidPoint p);
Matrix3 jacobian_g(double alpha, SolenoidPoint p);

/// Euclidean distance between the disk coordinates.
double fiber_distance(SolenoidPoint a, SolenoidPoint b);

/// Axis-aligned box of slopes (v2/v1, v3/v1) containing the current image
/// of the centre-unstable cone. Stored as centre and radius per axis so that
/// widths near 1e-12 keep full relative precision.
struct ConeState {
  double s2_mid;
  double s2_rad;
  double s3_mid;
  double s3_rad;

  static ConeState from_bounds(double s2_lo, double s2_hi, double s3_lo, double s3_hi);

  double s2_lo() const { return s2_mid - s2_rad; }
  double s2_hi() const { return s2_mid + s2_rad; }
  double s3_lo() const { return s3_mid - s3_rad; }
  double s3_hi() const { return s3_mid + s3_rad; }

  double width() const;  // max of the two side lengths
  bool contains(const ConeState& other) const;
};

/// Half-width of the smallest centred slope box mapped into itself by every
/// Dg_a: with off-diagonal entries bounded by pi, K = pi + K/10.
inline constexpr double kConeHalfWidth = 10.0 * std::numbers::pi / 9.0;

ConeState initial_cone();

/// Exact image of the slope box under Dg_a at base point x:
///   s2' = (-pi sin(2 pi x) + s2/10) / T'_a(x),
///   s3' = ( pi cos(2 pi x) + s3/10) / T'_a(x).
ConeState cone_push(double alpha, CirclePoint x, const ConeState& c);

// ---------------------------------------------------------------------------
// Randomly translated cat map (u,v) -> (2u + v + eu, u + v + ev) mod 1
// ---------------------------------------------------------------------------

inline constexpr double kCatPerturbationBound = 0.05;
/// Unstable eigenvalue (3 + sqrt 5)/2 of ((2,1),(1,1)).
inline constexpr double kCatUnstableEigenvalue = (3.0 + 2.23606797749978969640917366873128) / 2.0;

TorusPoint eval_perturbed_cat(double eps_u, double eps_v, TorusPoint p);

/// Reduces to [0, 1).
double wrap_unit(double x);

}  // namespace qml
