#include "qml/orbits.hpp"

#include <string>

#include "qml/errors.hpp"

namespace qml {

Family parse_family(std::string_view name) {
  if (name == "intermittent_circle" || name == "circle") return Family::intermittent_circle;
  if (name == "solenoid") return Family::solenoid;
  if (name == "perturbed_cat" || name == "cat") return Family::perturbed_cat;
  throw ArgumentError("unknown family '" + std::string(name) + "'");
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::intermittent_circle:
      return "intermittent_circle";
    case Family::solenoid:
      return "solenoid";
    case Family::perturbed_cat:
      break;
  }
  return "perturbed_cat";
}

namespace {

void validate_intermittent_law(const Environment& env) {
  const auto& law = env.law();
  if (!(law.support_min() > 0.0 && law.support_max() < 1.0))
    throw DomainError("intermittent families need parameter support inside (0,1), got " +
                      law.to_string());
}

bool valid_point(const CirclePoint& p) { return p.x >= 0.0 && p.x < 1.0; }
bool valid_point(const SolenoidPoint& p) {
  return p.x >= 0.0 && p.x < 1.0 && p.y * p.y + p.z * p.z <= 1.0;
}
bool valid_point(const TorusPoint& p) { return p.u >= 0.0 && p.u < 1.0 && p.v >= 0.0 && p.v < 1.0; }

}  // namespace

void CircleFamily::validate(const Environment& env) { validate_intermittent_law(env); }
void SolenoidFamily::validate(const Environment& env) { validate_intermittent_law(env); }
void CatFamily::validate(const Environment& env) {
  const auto& law = env.law();
  if (!(law.support_min() >= -kCatPerturbationBound && law.support_max() <= kCatPerturbationBound))
    throw DomainError("cat map perturbations must lie in [-0.05, 0.05], got " + law.to_string());
}

void validate(const OrbitRequest& req) {
  if (req.length < 0) throw ArgumentError("orbit length must be nonnegative");
  visit_family(req.family, [&](auto fam) {
    using F = decltype(fam);
    const auto* p = std::get_if<typename F::point_type>(&req.start);
    if (p == nullptr)
      throw ArgumentError("start point type does not match family " +
                          std::string(family_name(req.family)));
    if (!valid_point(*p)) throw ArgumentError("start point violates the family's invariants");
    F::validate(req.env);
  });
}

std::vector<AnyPoint> run_orbit(const OrbitRequest& req) {
  validate(req);
  return visit_family(req.family, [&](auto fam) {
    using F = decltype(fam);
    const auto typed = orbit<F>(req.env, std::get<typename F::point_type>(req.start), req.length,
                                req.mode);
    return std::vector<AnyPoint>(typed.begin(), typed.end());
  });
}

CocycleTrace cocycle_trace(const OrbitRequest& req) {
  if (req.mode != OrbitMode::forward) throw ArgumentError("cocycle_trace needs a forward request");
  validate(req);
  return visit_family(req.family, [&](auto fam) {
    using F = decltype(fam);
    return CocycleTrace{trace<F>(req.env, std::get<typename F::point_type>(req.start), req.length)};
  });
}

}  // namespace qml
