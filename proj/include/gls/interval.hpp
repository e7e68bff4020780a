#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "gls/error.hpp"

namespace gls {

/// Exponent interval with lower >= 1. A single point r is represented as
/// the closed interval [r, r]; every other interval has lower < upper.
struct PInterval {
  double lower = 1.0;
  double upper = std::numeric_limits<double>::infinity();
  bool lower_closed = true;
  bool upper_closed = false;

  static PInterval make(double lower, double upper, bool lower_closed, bool upper_closed) {
    PInterval d{lower, upper, lower_closed, upper_closed};
    d.validate();
    return d;
  }

  static PInterval closed(double lower, double upper) { return make(lower, upper, true, true); }
  static PInterval open(double lower, double upper) { return make(lower, upper, false, false); }

  /// [lower, inf)
  static PInterval from(double lower, bool lower_closed = true) {
    return make(lower, std::numeric_limits<double>::infinity(), lower_closed, false);
  }

  static PInterval point(double r) { return make(r, r, true, true); }

  void validate() const {
    if (!(lower >= 1.0) || std::isnan(upper)) {
      throw Error(ErrorCode::invalid_parameter, "exponent interval must satisfy lower >= 1");
    }
    if (upper_closed && std::isinf(upper)) {
      throw Error(ErrorCode::invalid_parameter, "an infinite upper endpoint cannot be closed");
    }
    if (lower == upper) {
      if (!(lower_closed && upper_closed)) throw Error(ErrorCode::empty_domain, "degenerate interval must be closed");
    } else if (!(lower < upper)) {
      throw Error(ErrorCode::empty_domain, "exponent interval with lower > upper");
    }
  }

  [[nodiscard]] bool is_point() const noexcept { return lower == upper; }
  [[nodiscard]] bool is_bounded() const noexcept { return std::isfinite(upper); }

  [[nodiscard]] bool contains(double p) const noexcept {
    if (std::isnan(p)) return false;
    const bool above = lower_closed ? p >= lower : p > lower;
    const bool below = upper_closed ? p <= upper : p < upper;
    return above && below;
  }

  /// Intersection; nullopt when empty.
  [[nodiscard]] std::optional<PInterval> intersect(const PInterval& other) const {
    PInterval r;
    if (lower > other.lower) {
      r.lower = lower;
      r.lower_closed = lower_closed;
    } else if (other.lower > lower) {
      r.lower = other.lower;
      r.lower_closed = other.lower_closed;
    } else {
      r.lower = lower;
      r.lower_closed = lower_closed && other.lower_closed;
    }
    if (upper < other.upper) {
      r.upper = upper;
      r.upper_closed = upper_closed;
    } else if (other.upper < upper) {
      r.upper = other.upper;
      r.upper_closed = other.upper_closed;
    } else {
      r.upper = upper;
      r.upper_closed = upper_closed && other.upper_closed;
    }
    if (r.lower > r.upper) return std::nullopt;
    if (r.lower == r.upper && !(r.lower_closed && r.upper_closed)) return std::nullopt;
    return r;
  }

  [[nodiscard]] std::string to_string() const {
    std::ostringstream os;
    os.precision(12);
    if (is_point()) {
      os << "{" << lower << "}";
      return os.str();
    }
    os << (lower_closed ? '[' : '(') << lower << ", ";
    if (std::isinf(upper)) {
      os << "inf";
    } else {
      os << upper;
    }
    os << (upper_closed ? ']' : ')');
    return os.str();
  }

  friend bool operator==(const PInterval&, const PInterval&) = default;
};

}  // namespace gls
