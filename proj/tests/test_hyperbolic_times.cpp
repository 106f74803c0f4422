#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "qml/errors.hpp"
#include "qml/hyperbolic_times.hpp"

using namespace qml;
using Times = std::vector<std::int64_t>;

TEST_CASE("pliss times on small examples") {
  const std::vector<double> ones(20, -1.0);
  Times all(20);
  for (int i = 0; i < 20; ++i) all[static_cast<std::size_t>(i)] = i + 1;
  CHECK(pliss_times(ones, -0.5) == all);

  const std::vector<double> t{-1.0, 0.0, -1.0, -1.0};
  CHECK(oracle::pliss_brute(t, -0.5) == Times{1, 3, 4});
  CHECK(pliss_times(t, -0.5) == Times{1, 3, 4});

  CHECK(pliss_times(std::vector<double>(50, 0.0), -0.1).empty());
  CHECK(pliss_times(std::vector<double>{}, -0.1).empty());
  CHECK_THROWS_AS(pliss_times(t, 0.0), ArgumentError);
}

TEST_CASE("ties count as hyperbolic") {
  const std::vector<double> t{-0.5, -0.5, -0.5};
  CHECK(pliss_times(t, -0.5) == Times{1, 2, 3});
}

TEST_CASE("pliss times agree with the definition exhaustively on short sequences") {
  const double alphabet[3] = {-2.0, -1.0, 0.0};
  for (int len = 1; len <= 8; ++len) {
    int total = 1;
    for (int i = 0; i < len; ++i) total *= 3;
    std::vector<double> t(static_cast<std::size_t>(len));
    for (int code = 0; code < total; ++code) {
      int c = code;
      for (int i = 0; i < len; ++i, c /= 3) t[static_cast<std::size_t>(i)] = alphabet[c % 3];
      for (double la : {-0.5, -1.0, -1.5})
        REQUIRE(pliss_times(t, la) == oracle::pliss_brute(t, la));
    }
  }
}

TEST_CASE("pliss times agree with the definition on random real sequences") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-2.0, 0.5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> t(200);
    for (auto& v : t) v = u(rng);
    REQUIRE(pliss_times(t, -0.3) == oracle::pliss_brute(t, -0.3));
  }
}

TEST_CASE("monotone in log_alpha and causal in the prefix") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.5, 0.3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> t(120);
    for (auto& v : t) v = u(rng);
    const auto strict = pliss_times(t, -0.6), loose = pliss_times(t, -0.2);
    REQUIRE(std::includes(loose.begin(), loose.end(), strict.begin(), strict.end()));

    const std::size_t cut = 1 + static_cast<std::size_t>(trial % 119);
    const auto prefix = pliss_times(std::span<const double>(t).first(cut), -0.4);
    auto full = pliss_times(t, -0.4);
    full.erase(std::upper_bound(full.begin(), full.end(), static_cast<std::int64_t>(cut)), full.end());
    REQUIRE(prefix == full);
  }
}

TEST_CASE("pliss density bound on constructed traces") {
  const double A = 2.0, c = 0.5, la = -0.25;
  const double rho = pliss_density_bound(c, la, A);
  CHECK(rho == doctest::Approx((c - 0.25) / (A - 0.25)));
  CHECK_THROWS_AS(pliss_density_bound(0.2, -0.25, A), ArgumentError);

  // front-loaded worst case: all the expansion happens first
  const std::size_t N = 1000;
  std::vector<double> front(N, 0.0);
  for (std::size_t i = 0; i < N / 4; ++i) front[i] = -A;
  CHECK(static_cast<double>(pliss_times(front, la).size()) >= rho * N);

  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-A, 0.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> t(N);
    for (auto& v : t) v = trial % 2 ? u(rng) : (u(rng) < -A * 0.8 ? -A : 0.0);
    double sum = 0.0;
    for (double v : t) sum += v;
    if (sum / N > -c) continue;
    REQUIRE(static_cast<double>(pliss_times(t, la).size()) >= rho * N);
  }
}

TEST_CASE("expansion time") {
  CHECK(expansion_time(std::vector<double>(10, -1.0), 0.5) == 1);
  std::vector<double> t(20, -3.0);
  t[0] = t[1] = 0.0;
  CHECK(expansion_time(t, 0.5) == 3);
  CHECK(oracle::expansion_scan(t, 0.5) == 3);
  CHECK_FALSE(expansion_time(std::vector<double>(10, 0.0), 0.5).has_value());
  CHECK_THROWS_AS(expansion_time(t, 0.0), ArgumentError);

  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(-1.2, 0.4);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> s(60);
    for (auto& v : s) v = u(rng);
    const auto got = expansion_time(s, 0.3);
    const auto want = oracle::expansion_scan(s, 0.3);
    REQUIRE(got.value_or(-1) == want);
  }
}

TEST_CASE("trace analysis report") {
  const std::vector<double> t{-1.0, 0.0, -1.0, -1.0};
  const auto r = analyze_trace(t, -0.5, 0.4);
  CHECK(r.times == Times{1, 3, 4});
  CHECK(r.density_lower_bound == 0.75);
  CHECK(r.expansion_time == 1);
}

TEST_CASE("density estimates along orbits") {
  const Environment cat(1, ParameterLaw::uniform(-0.05, 0.05));
  CHECK(density_estimate(cat, Family::perturbed_cat, TorusPoint{0.2, 0.3}, 500, -0.5) == 1.0);
  const Environment neutral(1, ParameterLaw::dirac(0.5));
  CHECK(density_estimate(neutral, Family::intermittent_circle, CirclePoint{0.0}, 500, -0.05) == 0.0);
  const Environment random(1, ParameterLaw::uniform(0.4, 0.6));
  CHECK(density_estimate(random, Family::intermittent_circle, CirclePoint{0.3}, 100000, -0.05) >= 0.2);
  CHECK_THROWS_AS(density_estimate(random, Family::intermittent_circle, CirclePoint{0.3}, 0, -0.05),
                  ArgumentError);
}
