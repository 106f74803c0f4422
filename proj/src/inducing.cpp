#include "qml/inducing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qml/csv.hpp"
#include "qml/errors.hpp"
#include "qml/maps.hpp"

namespace qml {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Interval {
  double lo;
  double hi;
  double length() const { return hi - lo; }
};

// Pulls E = (a, b) in (0,1) back through I_m^-(env): the last step of the
// return block uses the right branch, the first m-1 steps the left one.
Interval pullback_minus(const Environment& env, int m, Interval e) {
  const double alpha_last = env.param_at(m - 1);
  double a = 1.0 - branch_profile_inverse(alpha_last, 1.0 - e.lo);
  double b = 1.0 - branch_profile_inverse(alpha_last, 1.0 - e.hi);
  for (int j = m - 2; j >= 0; --j) {
    const double alpha = env.param_at(j);
    a = branch_profile_inverse(alpha, a);
    b = branch_profile_inverse(alpha, b);
  }
  return {a, b};
}

}  // namespace

// ---------------------------------------------------------------------------

double preimage_of_half(const Environment& env, int n) {
  if (n < 1) throw RangeError("preimage level must be >= 1");
  double c = 0.5;
  for (int j = n - 2; j >= 0; --j) c = branch_profile_inverse(env.param_at(j), c);
  return c;
}

PreimageLadder::PreimageLadder(Environment env)
    : env_(std::move(env)), dirac_(env_.law().is_dirac()), xs_{0.5} {}

double PreimageLadder::at(int n) {
  if (n < 1) throw RangeError("preimage level must be >= 1");
  const auto idx = static_cast<std::size_t>(n - 1);
  if (dirac_) {
    const double alpha = env_.param_at(0);
    while (xs_.size() <= idx) xs_.push_back(branch_profile_inverse(alpha, xs_.back()));
    return xs_[idx];
  }
  if (xs_.size() <= idx) xs_.resize(idx + 1, kNaN);
  if (std::isnan(xs_[idx])) xs_[idx] = preimage_of_half(env_, n);
  return xs_[idx];
}

ReturnPartition build_partition(const Environment& env, int max_n, Exec exec) {
  if (max_n < 1) throw ArgumentError("max_n must be >= 1");
  const double lo = env.law().support_min();
  const double hi = env.law().support_max();
  if (!(lo > 0.0 && hi < 1.0))
    throw DomainError("partition needs parameter support inside (0,1), got " + env.law().to_string());

  ReturnPartition p{env, max_n, std::vector<double>(static_cast<std::size_t>(max_n)), {}};
  auto& xs = p.x_minus;
  xs[0] = 0.5;
  if (env.law().is_dirac()) {
    const double alpha = env.param_at(0);
    for (int n = 2; n <= max_n; ++n)
      xs[static_cast<std::size_t>(n - 1)] =
          branch_profile_inverse(alpha, xs[static_cast<std::size_t>(n - 2)]);
  } else if (exec == Exec::serial) {
    for (int n = 2; n <= max_n; ++n) xs[static_cast<std::size_t>(n - 1)] = preimage_of_half(env, n);
  } else {
    // Chains are independent; cost grows linearly in n.
#pragma omp parallel for schedule(dynamic, 16)
    for (int n = 2; n <= max_n; ++n) xs[static_cast<std::size_t>(n - 1)] = preimage_of_half(env, n);
  }

  p.cells.reserve(2 * static_cast<std::size_t>(max_n));
  for (int n = 2; n <= max_n; ++n) {
    const double inner = xs[static_cast<std::size_t>(n - 2)];
    const double outer = xs[static_cast<std::size_t>(n - 1)];
    p.cells.push_back({outer, inner, inner - outer, n, n, Side::minus});
  }
  for (int n = 2; n <= max_n; ++n) {
    const double inner = xs[static_cast<std::size_t>(n - 2)];
    const double outer = xs[static_cast<std::size_t>(n - 1)];
    p.cells.push_back({1.0 - inner, 1.0 - outer, inner - outer, n, n, Side::plus});
  }
  return p;
}

double tail_measure(const ReturnPartition& p, int m) {
  if (m < 1 || m > p.max_n)
    throw RangeError("tail_measure: m = " + std::to_string(m) + " outside [1, " +
                     std::to_string(p.max_n) + "]");
  return p.minus_at(m) + p.plus_complement_at(m);
}

double total_mass(const ReturnPartition& p) {
  long double acc = 0.0L;
  for (const auto& c : p.cells) acc += c.length;
  return static_cast<double>(acc + tail_measure(p, p.max_n));
}

double markov_check(const ReturnPartition& p, int n) {
  if (n < 1 || n > p.max_n) throw RangeError("markov_check: n outside [1, max_n]");
  if (n == 1) return 0.0;
  double defect = 0.0;
  std::vector<double> chain;
  auto check_chain = [&](int level) {
    // chain[j] = x_{level-j}(sigma^j w); chain[level-1] = 1/2.
    chain.assign(static_cast<std::size_t>(level), 0.5);
    for (int j = level - 2; j >= 0; --j)
      chain[static_cast<std::size_t>(j)] =
          branch_profile_inverse(p.env.param_at(j), chain[static_cast<std::size_t>(j + 1)]);
    defect = std::max(defect, std::abs(chain[0] - p.minus_at(level)));
    for (int j = 0; j + 1 < level; ++j) {
      const double alpha = p.env.param_at(j);
      const double c = chain[static_cast<std::size_t>(j)];
      const double next = chain[static_cast<std::size_t>(j + 1)];
      defect = std::max(defect, std::abs(eval_T(alpha, {c}).x - next));
      defect = std::max(defect, std::abs(eval_T(alpha, {1.0 - c}).x - (1.0 - next)));
    }
  };
  check_chain(n);
  check_chain(n - 1);
  return defect;
}

// ---------------------------------------------------------------------------

InducedMap::InducedMap(Environment env, int max_n) : env_(std::move(env)), max_n_(max_n) {
  if (max_n < 2) throw ArgumentError("induced map needs max_n >= 2");
}

PreimageLadder& InducedMap::ladder(std::int64_t offset) {
  auto it = ladders_.find(offset);
  if (it == ladders_.end()) it = ladders_.emplace(offset, PreimageLadder(env_.shift(offset))).first;
  return it->second;
}

int InducedMap::cell_of(std::int64_t offset, double x) {
  const double s = x < 0.5 ? x : 1.0 - x;
  if (!(s > 0.0 && s < 0.5)) return 0;
  auto& lad = ladder(offset);
  // Smallest n >= 2 with x_n < s; x_n is strictly decreasing in n.
  int lo = 1;  // x_lo >= s
  int hi = 2;
  while (lad.at(hi) >= s) {
    if (hi >= max_n_) return 0;
    lo = hi;
    hi = std::min(2 * hi, max_n_);
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (lad.at(mid) < s) hi = mid;
    else lo = mid;
  }
  return x < 0.5 ? -hi : hi;
}

InducedStep InducedMap::step(std::int64_t offset, double x) {
  const int n = std::abs(cell_of(offset, x));
  if (n == 0) return {x, 0.0, 0};
  double log_deriv = 0.0;
  for (int j = 0; j < n; ++j) {
    const double alpha = env_.param_at(offset + j);
    log_deriv += log_deriv_T(alpha, x);
    x = eval_T(alpha, {x}).x;
  }
  return {x, log_deriv, n};
}

int InducedMap::separation_time(double x, double y, int s_max) {
  std::int64_t offset = 0;
  int s = 0;
  while (s < s_max) {
    const int cx = cell_of(offset, x);
    const int cy = cell_of(offset, y);
    if (cx == 0 || cy == 0 || cx != cy) return s;
    ++s;
    const auto fx = step(offset, x);
    const auto fy = step(offset, y);
    x = fx.image;
    y = fy.image;
    offset += fx.return_time;
  }
  return s;
}

DistortionReport distortion_report(const ReturnPartition& p, int samples, std::uint64_t seed,
                                   int ladder_depth) {
  if (samples < 1) throw ArgumentError("distortion_report needs samples >= 1");
  constexpr int kSeparationCap = 40;
  InducedMap im(p.env, std::min(p.max_n, ladder_depth));
  DistortionReport rep;
  rep.max_by_separation.assign(kSeparationCap, 0.0);

  std::int64_t counter = 0;
  int attempts = 0;
  while (rep.pairs < samples && attempts < 20 * samples) {
    ++attempts;
    const double x = unit_interval(counter_hash(seed, streams::test_pairs, counter++));
    const double u_gap = unit_interval(counter_hash(seed, streams::test_pairs, counter++));
    const bool up = (counter_hash(seed, streams::test_pairs, counter++) & 1U) != 0;
    const int c = im.cell_of(0, x);
    if (c == 0) continue;
    auto& lad = im.ladder(0);
    const int n = std::abs(c);
    const double inner = lad.at(n - 1);
    const double outer = lad.at(n);
    const double lo = c < 0 ? outer : 1.0 - inner;
    const double hi = c < 0 ? inner : 1.0 - outer;
    // Log-uniform gaps so that all separation depths are visited.
    const double gap = (hi - lo) * std::pow(10.0, -10.0 * u_gap);
    double y = up ? x + gap : x - gap;
    if (!(y > lo && y < hi)) y = up ? x - gap : x + gap;
    if (!(y > lo && y < hi) || y == x) continue;

    const int s = im.separation_time(x, y, kSeparationCap);
    if (s < 1 || s >= kSeparationCap) continue;
    const double d = std::abs(im.step(0, x).log_deriv - im.step(0, y).log_deriv);
    auto& slot = rep.max_by_separation[static_cast<std::size_t>(s - 1)];
    slot = std::max(slot, d);
    ++rep.pairs;
  }

  std::vector<double> sx, sy;
  for (std::size_t s = 0; s < rep.max_by_separation.size(); ++s) {
    if (rep.max_by_separation[s] > 0.0) {
      sx.push_back(static_cast<double>(s));
      sy.push_back(std::log(rep.max_by_separation[s]));
    }
  }
  if (sx.size() < 2) throw ArgumentError("distortion_report: fewer than two separation levels seen");
  const double n = static_cast<double>(sx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < sx.size(); ++i) {
    mx += sx[i];
    my += sy[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < sx.size(); ++i) {
    sxx += (sx[i] - mx) * (sx[i] - mx);
    sxy += (sx[i] - mx) * (sy[i] - my);
  }
  const double slope = sxy / sxx;
  rep.beta_hat = std::exp(slope);
  double log_c = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sx.size(); ++i) log_c = std::max(log_c, sy[i] - slope * sx[i]);
  rep.C_hat = std::exp(log_c);
  return rep;
}

CellDiameter cell_diameter(const Environment& env, int k, int max_n) {
  if (k < 1) throw ArgumentError("cell_diameter needs k >= 1");
  if (max_n < 2) throw ArgumentError("cell_diameter needs max_n >= 2");
  // best[r] is the largest tracked element at fibre sigma^{k+r} w for a
  // remaining window of j = k - r steps.
  std::vector<Interval> best(static_cast<std::size_t>(k) + 1, Interval{0.0, 1.0});
  bool truncated = false;
  for (int r = k - 1; r >= 0; --r) {
    const int j = k - r;
    const Environment fibre = env.shift(k + r);
    PreimageLadder lad(fibre);
    Interval top{0.0, 0.0};
    for (int m = j + 1; m <= max_n; ++m) {
      const double inner = lad.at(m - 1);
      const double outer = lad.at(m);
      if (inner - outer > top.length()) top = {outer, inner};
    }
    if (j + 1 > max_n) truncated = true;
    for (int m = 2; m <= j; ++m) {
      const Interval e = best[static_cast<std::size_t>(r + m)];
      const Interval minus = pullback_minus(fibre, m, e);
      if (minus.length() > top.length()) top = minus;
      const Interval mirrored = pullback_minus(fibre, m, {1.0 - e.hi, 1.0 - e.lo});
      if (mirrored.length() > top.length()) top = {1.0 - mirrored.hi, 1.0 - mirrored.lo};
    }
    best[static_cast<std::size_t>(r)] = top;
  }
  const double quotient = best[0].length();
  return {std::max(std::pow(10.0, -k), quotient), quotient, truncated};
}

void write_partition_csv(std::ostream& out, const ReturnPartition& p) {
  out << "n,side,lo,hi,return_time\n";
  for (const auto& c : p.cells)
    out << c.n << ',' << (c.side == Side::minus ? "minus" : "plus") << ',' << fmt17(c.lo) << ','
        << fmt17(c.hi) << ',' << c.return_time << '\n';
}

}  // namespace qml
