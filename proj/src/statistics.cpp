#include "qml/statistics.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <cmath>
#include <numbers>
#include <string>

#include <json.hpp>

#include "qml/csv.hpp"
#include "qml/errors.hpp"
#include "qml/hyperbolic_times.hpp"

namespace qml {

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

namespace {

void check_eta(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw ArgumentError("observable exponent eta must lie in (0,1]");
}

double parse_real(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end)
    throw ArgumentError("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
  return v;
}

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

Observable Observable::holder_cusp(double eta) {
  check_eta(eta);
  return Observable(Kind::holder_cusp, eta);
}

Observable Observable::torus_lacunary(double eta) {
  check_eta(eta);
  Observable o(Kind::torus_lacunary, eta);
  o.weights_.resize(kLacunaryModes);
  double total = 0.0;
  for (int m = 0; m < kLacunaryModes; ++m) {
    o.weights_[static_cast<std::size_t>(m)] = std::pow(kCatUnstableEigenvalue, -m * eta);
    total += o.weights_[static_cast<std::size_t>(m)];
  }
  for (auto& w : o.weights_) w /= total;
  return o;
}

Observable Observable::parse(std::string_view text) {
  const auto colon = text.find(':');
  const auto head = text.substr(0, colon);
  const bool has_arg = colon != std::string_view::npos;
  const auto arg = has_arg ? text.substr(colon + 1) : std::string_view{};
  auto no_arg = [&](Observable o) {
    if (has_arg) throw ArgumentError("observable '" + std::string(head) + "' takes no parameter");
    return o;
  };
  if (head == "const" || head == "constant") return no_arg(constant());
  if (head == "cos" || head == "smooth_cos") return no_arg(smooth_cos());
  if (head == "fiber_y") return no_arg(fiber_y());
  if (head == "half" || head == "indicator_halfcircle") return no_arg(indicator_halfcircle());
  if (head == "cusp" || head == "holder_cusp")
    return holder_cusp(has_arg ? parse_real(arg, "eta") : 0.5);
  if (head == "lacunary" || head == "torus_lacunary")
    return torus_lacunary(has_arg ? parse_real(arg, "eta") : 0.5);
  throw ArgumentError("unknown observable '" + std::string(text) + "'");
}

std::string Observable::name() const {
  switch (kind_) {
    case Kind::constant:
      return "const";
    case Kind::smooth_cos:
      return "cos";
    case Kind::holder_cusp:
      return "cusp:" + fmt17(eta_);
    case Kind::fiber_y:
      return "fiber_y";
    case Kind::indicator_halfcircle:
      return "half";
    case Kind::torus_lacunary:
      break;
  }
  return "lacunary:" + fmt17(eta_);
}

void Observable::check_family(Family f) const {
  if (kind_ == Kind::fiber_y && f != Family::solenoid)
    throw ArgumentError("observable fiber_y is only defined on the solenoid");
  if (kind_ == Kind::torus_lacunary && f != Family::perturbed_cat)
    throw ArgumentError("observable lacunary is only defined on the torus");
}

double Observable::on_circle(double x) const {
  switch (kind_) {
    case Kind::constant:
      return 1.0;
    case Kind::smooth_cos:
      return std::cos(kTwoPi * x);
    case Kind::holder_cusp:
      return std::pow(std::abs(x - 0.5), eta_);
    case Kind::indicator_halfcircle:
      return x < 0.5 ? 1.0 : 0.0;
    case Kind::fiber_y:
    case Kind::torus_lacunary:
      break;
  }
  throw ArgumentError("observable " + name() + " needs more than the circle coordinate");
}

double Observable::operator()(TorusPoint p) const {
  if (kind_ != Kind::torus_lacunary) return on_circle(p.u);
  std::int64_t a = 1, b = 0;
  double acc = 0.0;
  for (int m = 0; m < kLacunaryModes; ++m) {
    double phase = static_cast<double>(a) * p.u + static_cast<double>(b) * p.v;
    phase -= std::floor(phase);
    acc += weights_[static_cast<std::size_t>(m)] * std::cos(kTwoPi * phase);
    const std::int64_t na = 2 * a + b;
    b = a + b;
    a = na;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Attractor samples
// ---------------------------------------------------------------------------

std::vector<AnyPoint> attractor_sample(const Environment& env, Family family, std::int64_t m,
                                       std::int64_t N, Exec exec) {
  if (m < 1) throw ArgumentError("burn-in m must be >= 1");
  if (N < 1) throw ArgumentError("sample size N must be >= 1");
  return visit_family(family, [&](auto fam) {
    using F = decltype(fam);
    F::validate(env);
    auto pts = attractor_sample<F>(env, m, N, exec);
    return std::vector<AnyPoint>(pts.begin(), pts.end());
  });
}

// ---------------------------------------------------------------------------
// Correlation kernel
// ---------------------------------------------------------------------------

namespace {

struct BatchSums {
  std::vector<FixedSum> phipsi;
  std::vector<FixedSum> phi;
  FixedSum psi;
  std::int64_t count = 0;
};

// Accumulates points [first, last) of the source. Each point is consumed
// once: psi at time 0, phi along the forward orbit up to n_max.
template <class F, class Source>
void accumulate(const Environment& env, const Observable& phi, const Observable& psi,
                std::int64_t n_max, std::int64_t first, std::int64_t last, Source&& source,
                BatchSums& out) {
  const auto width = static_cast<std::size_t>(n_max) + 1;
  out.phipsi.assign(width, FixedSum{});
  out.phi.assign(width, FixedSum{});
  for (std::int64_t i = first; i < last; ++i) {
    auto p = source(i);
    const double s = psi(p);
    out.psi.add(s);
    for (std::int64_t n = 0;; ++n) {
      const double f = phi(p);
      out.phipsi[static_cast<std::size_t>(n)].add(f * s);
      out.phi[static_cast<std::size_t>(n)].add(f);
      if (n == n_max) break;
      p = F::step(env, n, p);
    }
  }
  out.count = last - first;
}

double covariance(const FixedSum& fs, const FixedSum& f, const FixedSum& s, std::int64_t count) {
  const auto c = static_cast<double>(count);
  return fs.value() / c - (f.value() / c) * (s.value() / c);
}

template <class F, class Source>
CorrelationSeries correlate(const Environment& env, const Observable& phi, const Observable& psi,
                            std::int64_t n_max, std::int64_t N, Exec exec, Source&& source) {
  if (n_max < 1) throw ArgumentError("n_max must be >= 1");
  if (N < 1) throw ArgumentError("sample size N must be >= 1");
  phi.check_family(F::id);
  psi.check_family(F::id);

  const auto batches = static_cast<int>(std::min<std::int64_t>(kBatches, N));
  std::vector<BatchSums> sums(static_cast<std::size_t>(batches));
  auto run_batch = [&](int b) {
    const std::int64_t first = N * b / batches;
    const std::int64_t last = N * (b + 1) / batches;
    accumulate<F>(env, phi, psi, n_max, first, last, source, sums[static_cast<std::size_t>(b)]);
  };
  if (exec == Exec::serial) {
    for (int b = 0; b < batches; ++b) run_batch(b);
  } else {
#pragma omp parallel for schedule(dynamic, 1)
    for (int b = 0; b < batches; ++b) run_batch(b);
  }

  const auto width = static_cast<std::size_t>(n_max) + 1;
  BatchSums total;
  total.phipsi.assign(width, FixedSum{});
  total.phi.assign(width, FixedSum{});
  for (const auto& b : sums) {
    for (std::size_t n = 0; n < width; ++n) {
      total.phipsi[n].merge(b.phipsi[n]);
      total.phi[n].merge(b.phi[n]);
    }
    total.psi.merge(b.psi);
    total.count += b.count;
  }

  CorrelationSeries out;
  out.lags.resize(width);
  out.values.resize(width);
  out.std_error.assign(width, 0.0);
  std::vector<double> per_batch(static_cast<std::size_t>(batches));
  for (std::size_t n = 0; n < width; ++n) {
    out.lags[n] = static_cast<std::int64_t>(n);
    out.values[n] = covariance(total.phipsi[n], total.phi[n], total.psi, total.count);
    if (batches < 2) continue;
    double mean = 0.0;
    for (int b = 0; b < batches; ++b) {
      const auto& s = sums[static_cast<std::size_t>(b)];
      per_batch[static_cast<std::size_t>(b)] = covariance(s.phipsi[n], s.phi[n], s.psi, s.count);
      mean += per_batch[static_cast<std::size_t>(b)];
    }
    mean /= batches;
    double ss = 0.0;
    for (double v : per_batch) ss += (v - mean) * (v - mean);
    out.std_error[n] = std::sqrt(ss / (static_cast<double>(batches) * (batches - 1)));
  }
  out.meta.seed = env.seed();
  out.meta.law = env.law().to_string();
  out.meta.family = F::id;
  out.meta.samples = N;
  out.meta.phi = phi.name();
  out.meta.psi = psi.name();
  return out;
}

}  // namespace

std::int64_t default_burnin(std::int64_t n_max) { return std::max<std::int64_t>(100, 2 * n_max); }

template <class F>
CorrelationSeries correlation_from_points(const Environment& env, const Observable& phi,
                                          const Observable& psi, std::int64_t n_max,
                                          std::span<const typename F::point_type> points,
                                          Exec exec) {
  F::validate(env);
  return correlate<F>(env, phi, psi, n_max, static_cast<std::int64_t>(points.size()), exec,
                      [&](std::int64_t i) { return points[static_cast<std::size_t>(i)]; });
}

template CorrelationSeries correlation_from_points<CircleFamily>(const Environment&, const Observable&,
                                                                 const Observable&, std::int64_t,
                                                                 std::span<const CirclePoint>, Exec);
template CorrelationSeries correlation_from_points<SolenoidFamily>(const Environment&,
                                                                   const Observable&, const Observable&,
                                                                   std::int64_t,
                                                                   std::span<const SolenoidPoint>, Exec);
template CorrelationSeries correlation_from_points<CatFamily>(const Environment&, const Observable&,
                                                              const Observable&, std::int64_t,
                                                              std::span<const TorusPoint>, Exec);

CorrelationSeries quenched_correlation(const CorrelationRequest& req) {
  const std::int64_t m = req.burnin > 0 ? req.burnin : default_burnin(req.n_max);
  if (req.burnin < 0) throw ArgumentError("burn-in m must be >= 1");
  CorrelationSeries out;
  auto run = [&](auto fam) {
    using F = decltype(fam);
    F::validate(req.env);
    return correlate<F>(req.env, req.phi, req.psi, req.n_max, req.samples, req.exec,
                        [&](std::int64_t i) { return pullback<F>(req.env, reference_point<F>(req.env, i), m); });
  };
  req.phi.check_family(req.family);
  req.psi.check_family(req.family);
  if (req.family == Family::solenoid && !req.phi.depends_on_fiber() && !req.psi.depends_on_fiber()) {
    // The base coordinate of the solenoid is an autonomous intermittent
    // circle orbit, and both observables only read it.
    SolenoidFamily::validate(req.env);
    out = run(CircleFamily{});
    out.meta.family = Family::solenoid;
  } else {
    out = visit_family(req.family, run);
  }
  out.meta.burnin = m;
  return out;
}

// ---------------------------------------------------------------------------
// Fits
// ---------------------------------------------------------------------------

RateModel parse_rate_model(std::string_view s) {
  if (s == "polynomial") return RateModel::polynomial;
  if (s == "exponential") return RateModel::exponential;
  if (s == "stretched") return RateModel::stretched;
  throw ArgumentError("unknown rate model '" + std::string(s) + "'");
}

std::string_view rate_model_name(RateModel m) {
  switch (m) {
    case RateModel::polynomial:
      return "polynomial";
    case RateModel::exponential:
      return "exponential";
    case RateModel::stretched:
      break;
  }
  return "stretched";
}

namespace {

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto k = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  Line l;
  l.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  l.intercept = my - l.slope * mx;
  l.r2 = syy > 0.0 && sxx > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return l;
}

}  // namespace

RateFit fit_log_model(std::span<const double> n, std::span<const double> y, RateModel model) {
  if (n.size() != y.size()) throw ArgumentError("fit needs equally many abscissae and values");
  std::vector<double> ns, ly;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) {
      ns.push_back(n[i]);
      ly.push_back(std::log(y[i]));
    }
  }
  if (ns.size() < 2) throw ArgumentError("fit needs at least 2 positive points");

  auto regress = [&](auto regressor) {
    std::vector<double> x(ns.size());
    std::transform(ns.begin(), ns.end(), x.begin(), regressor);
    return least_squares(x, ly);
  };

  RateFit fit;
  fit.model = model;
  fit.points = static_cast<std::int64_t>(ns.size());
  fit.window = {static_cast<std::int64_t>(std::llround(ns.front())),
                static_cast<std::int64_t>(std::llround(ns.back()))};
  Line best;
  switch (model) {
    case RateModel::polynomial:
      best = regress([](double v) { return std::log(v); });
      break;
    case RateModel::exponential:
      best = regress([](double v) { return v; });
      break;
    case RateModel::stretched: {
      best.r2 = -1.0;
      for (int t = 1; t <= 10; ++t) {
        const double theta = 0.1 * t;
        const Line l = regress([theta](double v) { return std::pow(v, theta); });
        if (l.r2 > best.r2) {
          best = l;
          fit.theta = theta;
        }
      }
      break;
    }
  }
  fit.exponent = best.slope;
  fit.prefactor = std::exp(best.intercept);
  fit.r2 = best.r2;
  return fit;
}

RateFit fit_rate(const CorrelationSeries& series, RateModel model,
                 std::optional<std::pair<std::int64_t, std::int64_t>> window) {
  const auto lo = window ? window->first : std::int64_t{1};
  const auto hi = window ? window->second : std::numeric_limits<std::int64_t>::max();
  std::vector<double> n, y;
  for (std::size_t i = 0; i < series.lags.size(); ++i) {
    const auto lag = series.lags[i];
    if (lag < std::max<std::int64_t>(lo, 1) || lag > hi) continue;
    const double v = std::abs(series.values[i]);
    if (v > 2.0 * series.std_error[i] && v > 0.0) {
      n.push_back(static_cast<double>(lag));
      y.push_back(v);
    }
  }
  if (static_cast<int>(n.size()) < kMinSignalLags)
    throw InsufficientSignal("only " + std::to_string(n.size()) +
                                 " lags exceed twice their standard error (need " +
                                 std::to_string(kMinSignalLags) + ")",
                             static_cast<int>(n.size()));
  return fit_log_model(n, y, model);
}

// ---------------------------------------------------------------------------
// Expansion tails
// ---------------------------------------------------------------------------

std::vector<AnyPoint> uniform_start_grid(Family family, std::int64_t count) {
  if (count < 1) throw ArgumentError("start grid needs at least one point");
  std::vector<AnyPoint> out;
  out.reserve(static_cast<std::size_t>(count));
  if (family == Family::perturbed_cat) {
    const auto side = static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(count))));
    for (std::int64_t i = 0; i < count; ++i)
      out.emplace_back(TorusPoint{(static_cast<double>(i % side) + 0.5) / static_cast<double>(side),
                                  (static_cast<double>(i / side) + 0.5) / static_cast<double>(side)});
    return out;
  }
  for (std::int64_t i = 0; i < count; ++i) {
    const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(count);
    if (family == Family::solenoid)
      out.emplace_back(SolenoidPoint{x, 0.0, 0.0});
    else
      out.emplace_back(CirclePoint{x});
  }
  return out;
}

std::vector<std::pair<std::int64_t, double>> expansion_tail(const Environment& env, Family family,
                                                            std::span<const AnyPoint> starts,
                                                            std::int64_t horizon, double c,
                                                            Exec exec) {
  if (starts.size() < 1000) throw ArgumentError("expansion tail needs at least 1000 starts");
  if (horizon < 1) throw ArgumentError("horizon must be >= 1");
  if (!(c > 0.0)) throw ArgumentError("expansion constant c must be positive");

  // times[i] = expansion time of start i, horizon + 1 when not reached.
  std::vector<std::int64_t> times(starts.size());
  visit_family(family, [&](auto fam) {
    using F = decltype(fam);
    using P = typename F::point_type;
    F::validate(env);
    for (const auto& s : starts)
      if (!std::holds_alternative<P>(s)) throw ArgumentError("start point does not match the family");
    auto one = [&](std::size_t i) {
      const auto tr = trace<F>(env, std::get<P>(starts[i]), horizon);
      const auto e = expansion_time(tr, c);
      times[i] = e ? *e : horizon + 1;
    };
    const auto count = static_cast<std::int64_t>(starts.size());
    if (exec == Exec::serial) {
      for (std::int64_t i = 0; i < count; ++i) one(static_cast<std::size_t>(i));
    } else {
#pragma omp parallel for schedule(dynamic, 64)
      for (std::int64_t i = 0; i < count; ++i) one(static_cast<std::size_t>(i));
    }
  });

  std::vector<std::int64_t> hist(static_cast<std::size_t>(horizon) + 2, 0);
  for (auto t : times) ++hist[static_cast<std::size_t>(t)];
  std::vector<std::pair<std::int64_t, double>> out;
  out.reserve(static_cast<std::size_t>(horizon) + 1);
  auto remaining = static_cast<std::int64_t>(times.size());
  const auto total = static_cast<double>(times.size());
  for (std::int64_t n = 0; n <= horizon; ++n) {
    remaining -= hist[static_cast<std::size_t>(n)];
    out.emplace_back(n, static_cast<double>(remaining) / total);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

void write_correlation_csv(std::ostream& out, const CorrelationSeries& s) {
  out << "n,C_hat,stderr\n";
  for (std::size_t i = 0; i < s.lags.size(); ++i)
    out << s.lags[i] << ',' << fmt17(s.values[i]) << ',' << fmt17(s.std_error[i]) << '\n';
}

std::string rate_fit_json(const RateFit& fit) {
  nlohmann::ordered_json j;
  j["model"] = rate_model_name(fit.model);
  j["exponent"] = fit.exponent;
  j["prefactor"] = fit.prefactor;
  j["r2"] = fit.r2;
  j["window"] = {fit.window.first, fit.window.second};
  if (fit.model == RateModel::stretched) j["theta"] = fit.theta;
  return j.dump();
}

}  // namespace qml
