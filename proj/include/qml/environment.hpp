#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qml {

// ---------------------------------------------------------------------------
// Counter-based bit generation
// ---------------------------------------------------------------------------

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Stateless 64-bit word for (seed, stream, counter). Any index, including
/// negative ones, can be queried in O(1).
constexpr std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream,
                                     std::int64_t counter) noexcept {
  std::uint64_t h = mix64(seed ^ 0x6A09E667F3BCC909ULL);
  h = mix64(h ^ (stream * 0xD1B54A32D192ED03ULL));
  return mix64(h ^ static_cast<std::uint64_t>(counter));
}

/// Top 53 bits mapped to [0, 1).
constexpr double unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Stream identifiers reserved by the library so independent uses of one
/// seed never share bits.
namespace streams {
inline constexpr std::uint64_t parameters = 0;       // + component
inline constexpr std::uint64_t initial_points = 1000;
inline constexpr std::uint64_t return_times = std::uint64_t{1} << 40;  // + 2*pair + orbit
inline constexpr std::uint64_t test_pairs = 3000;
}  // namespace streams

// ---------------------------------------------------------------------------
// Parameter laws
// ---------------------------------------------------------------------------

struct UniformInterval {
  double lo;
  double hi;
};

struct Dirac {
  double value;
};

struct FiniteSupport {
  std::vector<double> values;
  std::vector<double> weights;
};

/// Law θ of a single coordinate of the environment. Immutable.
class ParameterLaw {
 public:
  static ParameterLaw uniform(double lo, double hi);
  static ParameterLaw dirac(double value);
  static ParameterLaw finite(std::vector<double> values, std::vector<double> weights);

  /// Parses "dirac:0.5", "uniform:0.4,0.6" or "finite:0.4,0.6;0.3,0.7"
  /// (values;weights). Throws ArgumentError on malformed input.
  static ParameterLaw parse(std::string_view text);

  /// Maps 64 random bits to a draw from the law.
  double sample(std::uint64_t bits) const;
  double cdf(double x) const;

  double support_min() const;
  double support_max() const;
  /// Mean of the law (used by oracles and summaries).
  double mean() const;

  bool is_dirac() const { return std::holds_alternative<Dirac>(kind_); }
  std::string to_string() const;

  const std::variant<UniformInterval, Dirac, FiniteSupport>& kind() const { return kind_; }

 private:
  explicit ParameterLaw(std::variant<UniformInterval, Dirac, FiniteSupport> kind);

  std::variant<UniformInterval, Dirac, FiniteSupport> kind_;
  std::vector<double> cumulative_;  // finite support only
};

// ---------------------------------------------------------------------------
// Environment ω ∈ B^Z with the left shift
// ---------------------------------------------------------------------------

/// A two-sided i.i.d. sequence of map parameters, stored as (seed, law,
/// offset). param_at is a pure function of (seed, law, offset + k).
class Environment {
 public:
  Environment(std::uint64_t seed, ParameterLaw law, std::int64_t offset = 0);

  /// ω_{offset+k}. `component` selects an independent coordinate for
  /// families that need more than one real per step (the torus family
  /// uses components 0 and 1).
  double param_at(std::int64_t k, unsigned component = 0) const;

  /// σ^j ω. O(1), shares the law.
  Environment shift(std::int64_t j) const;

  std::uint64_t seed() const { return seed_; }
  std::int64_t offset() const { return offset_; }
  const ParameterLaw& law() const { return *law_; }

  /// Raw bits of an auxiliary stream keyed on the seed only. Not affected
  /// by shift; used for initial conditions and tower return times.
  std::uint64_t stream_bits(std::uint64_t stream, std::int64_t counter) const {
    return counter_hash(seed_, stream, counter);
  }

 private:
  std::uint64_t seed_;
  std::shared_ptr<const ParameterLaw> law_;
  std::int64_t offset_;
};

}  // namespace qml
