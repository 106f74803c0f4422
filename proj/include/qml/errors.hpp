#pragma once

#include <stdexcept>
#include <string>

namespace qml {

/// Map parameter outside the family's admissible range.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Value outside the image or index range an operation accepts.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Invalid knob passed by the caller (non-positive constants, bad sizes).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A rate fit was requested on a series with too few lags above noise.
/// Carries the number of significant lags that were found.
class InsufficientSignal : public std::runtime_error {
 public:
  InsufficientSignal(const std::string& what, int significant_lags)
      : std::runtime_error(what), significant_lags_(significant_lags) {}
  int significant_lags() const noexcept { return significant_lags_; }

 private:
  int significant_lags_;
};

}  // namespace qml
