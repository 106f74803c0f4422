#include "qml/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qml/errors.hpp"

namespace qml {

namespace {

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ArgumentError("law: cannot parse number '" + item + "'");
    }
  }
  return out;
}

}  // namespace

ParameterLaw::ParameterLaw(std::variant<UniformInterval, Dirac, FiniteSupport> kind)
    : kind_(std::move(kind)) {}

ParameterLaw ParameterLaw::uniform(double lo, double hi) {
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw ArgumentError("uniform law requires finite lo <= hi");
  return ParameterLaw(UniformInterval{lo, hi});
}

ParameterLaw ParameterLaw::dirac(double value) {
  if (!std::isfinite(value)) throw ArgumentError("dirac law requires a finite value");
  return ParameterLaw(Dirac{value});
}

ParameterLaw ParameterLaw::finite(std::vector<double> values, std::vector<double> weights) {
  if (values.empty() || values.size() != weights.size())
    throw ArgumentError("finite law requires equally many values and weights");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ArgumentError("finite law weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ArgumentError("finite law weights must sum to 1");
  ParameterLaw law(FiniteSupport{std::move(values), std::move(weights)});
  const auto& fs = std::get<FiniteSupport>(law.kind_);
  law.cumulative_.resize(fs.weights.size());
  std::partial_sum(fs.weights.begin(), fs.weights.end(), law.cumulative_.begin());
  law.cumulative_.back() = 1.0;
  return law;
}

ParameterLaw ParameterLaw::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw ArgumentError("law '" + std::string(text) + "' must look like kind:args");
  const auto kind = text.substr(0, colon);
  const auto args = text.substr(colon + 1);
  if (kind == "dirac") {
    auto v = parse_list(args);
    if (v.size() != 1) throw ArgumentError("dirac law takes one value");
    return dirac(v[0]);
  }
  if (kind == "uniform") {
    auto v = parse_list(args);
    if (v.size() != 2) throw ArgumentError("uniform law takes lo,hi");
    return uniform(v[0], v[1]);
  }
  if (kind == "finite") {
    const auto semi = args.find(';');
    if (semi == std::string_view::npos) throw ArgumentError("finite law takes values;weights");
    return finite(parse_list(args.substr(0, semi)), parse_list(args.substr(semi + 1)));
  }
  throw ArgumentError("unknown law kind '" + std::string(kind) + "'");
}

double ParameterLaw::sample(std::uint64_t bits) const {
  const double u = unit_interval(bits);
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Dirac>) {
          return k.value;
        } else if constexpr (std::is_same_v<K, UniformInterval>) {
          if (k.lo == k.hi) return k.lo;
          const double x = k.lo + (k.hi - k.lo) * u;
          return x < k.hi ? x : std::nextafter(k.hi, k.lo);
        } else {
          const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
          const auto idx = static_cast<std::size_t>(
              std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                       static_cast<std::ptrdiff_t>(k.values.size()) - 1));
          return k.values[idx];
        }
      },
      kind_);
}

double ParameterLaw::cdf(double x) const {
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Dirac>) {
          return x >= k.value ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<K, UniformInterval>) {
          if (x < k.lo) return 0.0;
          if (x >= k.hi) return 1.0;
          return (x - k.lo) / (k.hi - k.lo);
        } else {
          double acc = 0.0;
          for (std::size_t i = 0; i < k.values.size(); ++i)
            if (k.values[i] <= x) acc += k.weights[i];
          return std::min(acc, 1.0);
        }
      },
      kind_);
}

double ParameterLaw::support_min() const {
  return std::visit(
      [](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Dirac>) return k.value;
        else if constexpr (std::is_same_v<K, UniformInterval>) return k.lo;
        else return *std::min_element(k.values.begin(), k.values.end());
      },
      kind_);
}

double ParameterLaw::support_max() const {
  return std::visit(
      [](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Dirac>) return k.value;
        else if constexpr (std::is_same_v<K, UniformInterval>) return k.hi;
        else return *std::max_element(k.values.begin(), k.values.end());
      },
      kind_);
}

double ParameterLaw::mean() const {
  return std::visit(
      [](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Dirac>) return k.value;
        else if constexpr (std::is_same_v<K, UniformInterval>) return 0.5 * (k.lo + k.hi);
        else return std::inner_product(k.values.begin(), k.values.end(), k.weights.begin(), 0.0);
      },
      kind_);
}

std::string ParameterLaw::to_string() const {
  std::ostringstream out;
  out.precision(17);
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Dirac>) {
          out << "dirac:" << k.value;
        } else if constexpr (std::is_same_v<K, UniformInterval>) {
          out << "uniform:" << k.lo << ',' << k.hi;
        } else {
          out << "finite:";
          for (std::size_t i = 0; i < k.values.size(); ++i) out << (i ? "," : "") << k.values[i];
          out << ';';
          for (std::size_t i = 0; i < k.weights.size(); ++i) out << (i ? "," : "") << k.weights[i];
        }
      },
      kind_);
  return out.str();
}

Environment::Environment(std::uint64_t seed, ParameterLaw law, std::int64_t offset)
    : seed_(seed), law_(std::make_shared<const ParameterLaw>(std::move(law))), offset_(offset) {}

double Environment::param_at(std::int64_t k, unsigned component) const {
  return law_->sample(counter_hash(seed_, streams::parameters + component, offset_ + k));
}

Environment Environment::shift(std::int64_t j) const {
  Environment out = *this;
  out.offset_ += j;
  return out;
}

}  // namespace qml
