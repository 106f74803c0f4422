#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qml/environment.hpp"
#include "qml/errors.hpp"

using namespace qml;

TEST_CASE("dirac law is constant at every index") {
  Environment env(7, ParameterLaw::dirac(0.5));
  for (std::int64_t k : {-1000000, -3, 0, 1, 99999}) CHECK(env.param_at(k) == 0.5);
}

TEST_CASE("param_at is a pure function of seed, law and index") {
  Environment a(1, ParameterLaw::uniform(0.4, 0.6));
  Environment b(1, ParameterLaw::uniform(0.4, 0.6));
  CHECK(a.param_at(0) == a.param_at(0));
  for (std::int64_t k = -500; k <= 500; ++k) {
    CHECK(a.param_at(k) == b.param_at(k));
    CHECK(a.param_at(k, 1) == b.param_at(k, 1));
  }
  Environment c(2, ParameterLaw::uniform(0.4, 0.6));
  int equal = 0;
  for (std::int64_t k = 0; k < 100; ++k) equal += a.param_at(k) == c.param_at(k);
  CHECK(equal == 0);
}

TEST_CASE("uniform draws over a two-sided window have the right mean") {
  Environment env(1, ParameterLaw::uniform(0.4, 0.6));
  double sum = 0.0;
  int count = 0;
  for (std::int64_t k = -10000; k < 10000; ++k, ++count) {
    const double v = env.param_at(k);
    REQUIRE(v >= 0.4);
    REQUIRE(v < 0.6);
    sum += v;
  }
  const double mean = sum / count;
  CHECK(mean >= 0.498);
  CHECK(mean <= 0.502);
}

TEST_CASE("shift is a group action compatible with param_at") {
  Environment env(11, ParameterLaw::uniform(0.2, 0.9));
  CHECK(env.shift(0).param_at(4) == env.param_at(4));
  CHECK(env.shift(3).shift(-3).param_at(-8) == env.param_at(-8));
  CHECK(env.shift(5).param_at(-5) == env.param_at(0));
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int64_t> d(-1000000, 1000000);
  for (int i = 0; i < 1000; ++i) {
    const auto j = d(rng), k = d(rng);
    REQUIRE(env.shift(j).param_at(k) == env.param_at(j + k));
    REQUIRE(env.shift(j).param_at(k, 1) == env.param_at(j + k, 1));
  }
  CHECK(env.shift(17).offset() == 17);
  CHECK(env.shift(17).seed() == env.seed());
}

TEST_CASE("law marginals pass a Kolmogorov-Smirnov check") {
  SUBCASE("uniform") {
    const auto law = ParameterLaw::uniform(0.4, 0.6);
    Environment env(3, law);
    std::vector<double> xs;
    for (std::int64_t k = 0; k < 10000; ++k) xs.push_back(env.param_at(k));
    CHECK(oracle::ks_distance(xs, [](double x) { return std::clamp((x - 0.4) / 0.2, 0.0, 1.0); }) < 0.02);
  }
  SUBCASE("finite support") {
    const auto law = ParameterLaw::finite({0.3, 0.6, 0.8}, {0.2, 0.5, 0.3});
    Environment env(4, law);
    int hits[3] = {0, 0, 0};
    for (std::int64_t k = 0; k < 10000; ++k) {
      const double v = env.param_at(k);
      hits[v == 0.3 ? 0 : v == 0.6 ? 1 : 2]++;
      REQUIRE((v == 0.3 || v == 0.6 || v == 0.8));
    }
    // empirical cdf at the atoms
    CHECK(std::abs(hits[0] / 1e4 - 0.2) < 0.02);
    CHECK(std::abs((hits[0] + hits[1]) / 1e4 - 0.7) < 0.02);
    CHECK(law.cdf(0.6) == doctest::Approx(0.7));
    CHECK(law.mean() == doctest::Approx(0.3 * 0.2 + 0.6 * 0.5 + 0.8 * 0.3));
  }
}

TEST_CASE("law parsing and validation") {
  CHECK(ParameterLaw::parse("dirac:0.5").is_dirac());
  const auto u = ParameterLaw::parse("uniform:0.4,0.6");
  CHECK(u.support_min() == 0.4);
  CHECK(u.support_max() == 0.6);
  CHECK(u.mean() == doctest::Approx(0.5));
  const auto f = ParameterLaw::parse("finite:0.4,0.6;0.25,0.75");
  CHECK(f.support_max() == 0.6);
  CHECK(ParameterLaw::parse(u.to_string()).support_max() == 0.6);
  CHECK_THROWS_AS(ParameterLaw::uniform(0.6, 0.4), ArgumentError);
  CHECK_THROWS_AS(ParameterLaw::finite({0.1, 0.2}, {0.5, 0.6}), ArgumentError);
  CHECK_THROWS_AS(ParameterLaw::finite({0.1, 0.2}, {-0.5, 1.5}), ArgumentError);
  CHECK_THROWS_AS(ParameterLaw::parse("gauss:0,1"), ArgumentError);
  CHECK_THROWS_AS(ParameterLaw::parse("uniform:0.4"), ArgumentError);
  CHECK_THROWS_AS(ParameterLaw::parse("dirac:abc"), ArgumentError);
}

TEST_CASE("unit_interval uses the top 53 bits") {
  CHECK(unit_interval(0) == 0.0);
  CHECK(unit_interval(~std::uint64_t{0}) < 1.0);
  CHECK(unit_interval(std::uint64_t{1} << 63) == 0.5);
  CHECK(unit_interval(0x7FF) == 0.0);
}
