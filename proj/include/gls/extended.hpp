#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <ostream>

#include "gls/error.hpp"

namespace gls {

/// Nonnegative extended real: a finite value >= 0 or +infinity.
///
/// Infinity is an explicit state, never the result of a floating overflow;
/// arithmetic that would overflow raises numeric-overflow instead.
/// Rules: x * inf = inf for x > 0, 0 * inf = 0, x / inf = 0.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;

  explicit ExtendedReal(double value) : value_(value) {
    if (!std::isfinite(value)) {
      throw Error(ErrorCode::numeric_overflow, "non-finite value used as a finite extended real");
    }
    if (value < 0.0) {
      throw Error(ErrorCode::invalid_parameter, "extended reals are nonnegative");
    }
  }

  static ExtendedReal infinity() noexcept {
    ExtendedReal r;
    r.infinite_ = true;
    return r;
  }

  [[nodiscard]] bool is_finite() const noexcept { return !infinite_; }
  [[nodiscard]] bool is_infinite() const noexcept { return infinite_; }

  /// Finite value, or IEEE +inf when infinite (for printing and comparisons only).
  [[nodiscard]] double value() const noexcept {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  /// Natural log; -inf for zero, +inf for infinity.
  [[nodiscard]] double log() const noexcept {
    if (infinite_) return std::numeric_limits<double>::infinity();
    return std::log(value_);
  }

  friend ExtendedReal operator*(ExtendedReal a, ExtendedReal b) {
    if (a.infinite_ || b.infinite_) {
      if ((a.is_finite() && a.value_ == 0.0) || (b.is_finite() && b.value_ == 0.0)) return ExtendedReal{};
      return infinity();
    }
    return checked(a.value_ * b.value_);
  }

  friend ExtendedReal operator*(double a, ExtendedReal b) { return ExtendedReal(a) * b; }

  friend ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
    if (a.infinite_ || b.infinite_) return infinity();
    return checked(a.value_ + b.value_);
  }

  /// Division of a finite numerator; x / inf = 0.
  friend double operator/(double numerator, ExtendedReal denominator) {
    if (denominator.infinite_) return 0.0;
    return numerator / denominator.value_;
  }

  friend bool operator==(ExtendedReal a, ExtendedReal b) noexcept {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }

  friend std::partial_ordering operator<=>(ExtendedReal a, ExtendedReal b) noexcept {
    return a.value() <=> b.value();
  }

  friend std::ostream& operator<<(std::ostream& os, ExtendedReal x) {
    if (x.infinite_) return os << "inf";
    return os << x.value_;
  }

 private:
  static ExtendedReal checked(double v) {
    if (!std::isfinite(v)) throw Error(ErrorCode::numeric_overflow, "extended-real arithmetic overflowed");
    return ExtendedReal(v);
  }

  double value_ = 0.0;
  bool infinite_ = false;
};

/// Maps exp(log_value) to an extended real; +inf log maps to infinity.
inline ExtendedReal exp_extended(double log_value) {
  if (log_value == std::numeric_limits<double>::infinity()) return ExtendedReal::infinity();
  const double v = std::exp(log_value);
  if (!std::isfinite(v)) throw Error(ErrorCode::numeric_overflow, "exp overflow");
  return ExtendedReal(v);
}

}  // namespace gls
