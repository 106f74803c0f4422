#include "qml/coupling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "qml/csv.hpp"
#include "qml/errors.hpp"

namespace qml {

// ---------------------------------------------------------------------------
// TailLaw
// ---------------------------------------------------------------------------

TailLaw::TailLaw(Kind kind, int cap, std::vector<double> s) : kind_(kind), cap_(cap) {
  // s[n] = untruncated P{R > n}, n = 0..cap.
  const double norm = 1.0 - s[static_cast<std::size_t>(cap)];
  cdf_.resize(static_cast<std::size_t>(cap));
  for (int n = 1; n <= cap; ++n)
    cdf_[static_cast<std::size_t>(n - 1)] = (1.0 - s[static_cast<std::size_t>(n)]) / norm;
  cdf_.back() = 1.0;
}

namespace {
void check_cap(int cap) {
  if (cap < 1) throw ArgumentError("tail law cap must be >= 1");
}
}  // namespace

TailLaw TailLaw::exponential(double c, int cap) {
  if (!(c > 0.0)) throw ArgumentError("exponential tail law needs c > 0");
  check_cap(cap);
  std::vector<double> s(static_cast<std::size_t>(cap) + 1);
  for (int n = 0; n <= cap; ++n) s[static_cast<std::size_t>(n)] = std::exp(-c * n);
  return TailLaw(Kind::exponential, cap, std::move(s));
}

TailLaw TailLaw::stretched(double c, double theta, int cap) {
  if (!(c > 0.0) || !(theta > 0.0 && theta <= 1.0))
    throw ArgumentError("stretched tail law needs c > 0 and theta in (0,1]");
  check_cap(cap);
  std::vector<double> s(static_cast<std::size_t>(cap) + 1);
  for (int n = 0; n <= cap; ++n) s[static_cast<std::size_t>(n)] = std::exp(-c * std::pow(n, theta));
  return TailLaw(Kind::stretched, cap, std::move(s));
}

TailLaw TailLaw::polynomial(double a, int cap) {
  if (!(a > 1.0)) throw ArgumentError("polynomial tail law needs a > 1");
  check_cap(cap);
  std::vector<double> s(static_cast<std::size_t>(cap) + 1);
  for (int n = 0; n <= cap; ++n) s[static_cast<std::size_t>(n)] = std::pow(1.0 + n, -a);
  return TailLaw(Kind::polynomial, cap, std::move(s));
}

TailLaw TailLaw::deterministic(int r) {
  if (r < 1) throw ArgumentError("deterministic return time must be >= 1");
  std::vector<double> s(static_cast<std::size_t>(r) + 1, 1.0);
  s[static_cast<std::size_t>(r)] = 0.0;
  return TailLaw(Kind::deterministic, r, std::move(s));
}

TailLaw TailLaw::parse(std::string_view text, int cap) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ArgumentError("tail law needs kind:parameters");
  const auto kind = text.substr(0, colon);
  std::vector<double> args;
  auto rest = text.substr(colon + 1);
  while (true) {
    const auto comma = rest.find(',');
    const auto item = rest.substr(0, comma);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || ptr != item.data() + item.size())
      throw ArgumentError("cannot parse tail law parameter '" + std::string(item) + "'");
    args.push_back(v);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  auto expect = [&](std::size_t k) {
    if (args.size() != k)
      throw ArgumentError("tail law '" + std::string(kind) + "' takes " + std::to_string(k) + " parameter(s)");
  };
  if (kind == "exponential") {
    expect(1);
    return exponential(args[0], cap);
  }
  if (kind == "stretched") {
    expect(2);
    return stretched(args[0], args[1], cap);
  }
  if (kind == "polynomial") {
    expect(1);
    return polynomial(args[0], cap);
  }
  if (kind == "deterministic") {
    expect(1);
    if (args[0] != std::floor(args[0])) throw ArgumentError("deterministic return time must be an integer");
    return deterministic(static_cast<int>(args[0]));
  }
  throw ArgumentError("unknown tail law '" + std::string(kind) + "'");
}

double TailLaw::pmf(int n) const {
  if (n < 1 || n > cap_) return 0.0;
  const double prev = n == 1 ? 0.0 : cdf_[static_cast<std::size_t>(n - 2)];
  return cdf_[static_cast<std::size_t>(n - 1)] - prev;
}

double TailLaw::survival(int n) const {
  if (n < 1) return 1.0;
  if (n >= cap_) return 0.0;
  return 1.0 - cdf_[static_cast<std::size_t>(n - 1)];
}

double TailLaw::mean() const {
  double m = 0.0;
  for (int n = 0; n < cap_; ++n) m += survival(n);
  return m;
}

int TailLaw::draw(std::uint64_t bits) const {
  const double u = unit_interval(bits);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto n = static_cast<int>(it - cdf_.begin()) + 1;
  return std::min(n, cap_);
}

// ---------------------------------------------------------------------------
// Walkers
// ---------------------------------------------------------------------------

TowerWalker::TowerWalker(const TailLaw& law, std::uint64_t seed, std::uint64_t key)
    : law_(&law), seed_(seed), stream_(streams::return_times + key) {}

void TowerWalker::advance() { last_return_ += law_->draw(counter_hash(seed_, stream_, draws_++)); }

std::int64_t TowerWalker::next_return_at_or_after(std::int64_t t) {
  while (last_return_ < t) advance();
  return last_return_;
}

bool TowerWalker::on_base(std::int64_t t) { return next_return_at_or_after(t) == t; }

std::vector<int> sample_tower_orbit(const Environment& env, const TailLaw& law, std::int64_t length,
                                    std::uint64_t key) {
  if (length < 1) throw ArgumentError("tower orbit length must be >= 1");
  TowerWalker w(law, env.seed(), key);
  std::vector<int> levels(static_cast<std::size_t>(length));
  int level = 0;
  for (std::int64_t t = 0; t < length; ++t) {
    level = w.on_base(t) ? 0 : level + 1;
    levels[static_cast<std::size_t>(t)] = level;
  }
  return levels;
}

// ---------------------------------------------------------------------------
// Coupling
// ---------------------------------------------------------------------------

namespace {

struct PairOutcome {
  std::vector<std::int64_t> couplings;  // T_1 < T_2 < ... within the horizon
  std::vector<std::int64_t> taus;       // first epoch only, when recorded
  int first_index = 0;
};

PairOutcome simulate_pair(const TailLaw& law, std::uint64_t seed, std::int64_t pair,
                          std::int64_t horizon, int ell0, int levels, bool record) {
  TowerWalker walkers[2] = {TowerWalker(law, seed, 2 * static_cast<std::uint64_t>(pair)),
                            TowerWalker(law, seed, 2 * static_cast<std::uint64_t>(pair) + 1)};
  PairOutcome out;
  std::int64_t start = 0;
  while (static_cast<int>(out.couplings.size()) < levels) {
    std::int64_t t = start;
    int who = 0;
    int index = 0;
    bool coupled = false;
    while (true) {
      const std::int64_t tau = walkers[who].next_return_at_or_after(t + ell0);
      if (tau > horizon) break;
      ++index;
      if (record && out.couplings.empty()) out.taus.push_back(tau);
      if (index >= 2 && walkers[1 - who].on_base(tau)) {
        out.couplings.push_back(tau);
        if (out.couplings.size() == 1) out.first_index = index;
        start = tau;
        coupled = true;
        break;
      }
      t = tau;
      who = 1 - who;
    }
    if (!coupled) break;
  }
  return out;
}

}  // namespace

CouplingRun run_coupling(const Environment& env, const TailLaw& law, std::int64_t pairs,
                         std::int64_t horizon, int ell0, const CouplingOptions& opts) {
  if (pairs < 1) throw ArgumentError("run_coupling needs pairs >= 1");
  if (ell0 < 1) throw ArgumentError("run_coupling needs ell0 >= 1");
  if (horizon < 2 * static_cast<std::int64_t>(ell0))
    throw ArgumentError("run_coupling needs horizon >= 2 ell0");
  if (opts.levels < 1) throw ArgumentError("run_coupling needs levels >= 1");

  CouplingRun run;
  run.ell0 = ell0;
  run.pairs = pairs;
  run.horizon = horizon;
  run.levels = opts.levels;
  const auto recorded = std::min(pairs, std::max<std::int64_t>(opts.recorded_pairs, 0));
  run.tau_records.resize(static_cast<std::size_t>(recorded));
  run.coupling_index.assign(static_cast<std::size_t>(recorded), 0);
  run.T_samples.assign(static_cast<std::size_t>(pairs), horizon + 1);

  const auto width = static_cast<std::size_t>(horizon) + 1;
  const auto lv = static_cast<std::size_t>(opts.levels);
  // hits[i][n] = number of pairs with T_{i+1} = n.
  std::vector<std::int64_t> hits(lv * width, 0);
  const std::uint64_t seed = env.seed();

  auto body = [&](std::int64_t p, std::vector<std::int64_t>& local) {
    const bool record = p < recorded;
    auto o = simulate_pair(law, seed, p, horizon, ell0, opts.levels, record);
    for (std::size_t i = 0; i < o.couplings.size(); ++i)
      ++local[i * width + static_cast<std::size_t>(o.couplings[i])];
    if (!o.couplings.empty()) run.T_samples[static_cast<std::size_t>(p)] = o.couplings[0];
    if (record) {
      run.tau_records[static_cast<std::size_t>(p)] = std::move(o.taus);
      run.coupling_index[static_cast<std::size_t>(p)] = o.first_index;
    }
  };

  if (opts.exec == Exec::serial) {
    for (std::int64_t p = 0; p < pairs; ++p) body(p, hits);
  } else {
#pragma omp parallel
    {
      std::vector<std::int64_t> local(hits.size(), 0);
#pragma omp for schedule(dynamic, 1024)
      for (std::int64_t p = 0; p < pairs; ++p) body(p, local);
#pragma omp critical
      for (std::size_t i = 0; i < hits.size(); ++i) hits[i] += local[i];
    }
  }

  run.Ti_tail.assign(lv, std::vector<double>(width, 0.0));
  const double total = static_cast<double>(pairs);
  for (std::size_t i = 0; i < lv; ++i) {
    std::int64_t reached = 0;
    for (std::size_t n = 0; n < width; ++n) {
      reached += hits[i * width + n];
      run.Ti_tail[i][n] = static_cast<double>(pairs - reached) / total;
    }
  }
  return run;
}

std::vector<double> uncoupled_mass_curve(const CouplingRun& run, double eps1) {
  if (!(eps1 > 0.0 && eps1 < 1.0)) throw ArgumentError("eps1 must lie in (0,1)");
  const auto width = static_cast<std::size_t>(run.horizon) + 1;
  const auto lv = run.Ti_tail.size();
  std::vector<double> curve(width, 0.0);
  for (std::size_t n = 0; n < width; ++n) {
    double acc = 0.0;
    double weight = 1.0;
    double prev_tail = 0.0;  // P{T_0 > n}
    for (std::size_t i = 0; i < lv; ++i) {
      const double tail = run.Ti_tail[i][n];
      acc += weight * (tail - prev_tail);
      prev_tail = tail;
      weight *= eps1;
    }
    acc += weight * (1.0 - prev_tail);
    curve[n] = acc;
  }
  return curve;
}

void write_tau_csv(std::ostream& out, const CouplingRun& run) {
  out << "pair_id,tau_index,tau_value\n";
  for (std::size_t p = 0; p < run.tau_records.size(); ++p)
    for (std::size_t i = 0; i < run.tau_records[p].size(); ++i)
      out << p << ',' << i + 1 << ',' << run.tau_records[p][i] << '\n';
}

void write_mass_csv(std::ostream& out, const std::vector<double>& curve) {
  out << "n,uncoupled_mass\n";
  for (std::size_t n = 0; n < curve.size(); ++n) out << n << ',' << fmt17(curve[n]) << '\n';
}

}  // namespace qml
