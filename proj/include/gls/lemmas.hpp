#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "gls/error.hpp"
#include "gls/numeric.hpp"

namespace gls {

/// Minimum of a product under a harmonic split, with the minimizing split.
struct SplitMinimum {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
};

/// (g1 + g2)^(g1 + g2) / (g1^g1 g2^g2), the minimum of a^g1 b^g2 over
/// 1/a + 1/b = 1. Attained at a = (g1 + g2) / g1, b = (g1 + g2) / g2; both
/// exceed 1.
inline SplitMinimum holder_split_min(double gamma1, double gamma2) {
  if (!(gamma1 > 0.0) || !(gamma2 > 0.0)) {
    throw Error(ErrorCode::nonpositive_parameter, "split powers must be positive");
  }
  const double theta = gamma1 + gamma2;
  // x^x evaluated through logs keeps the tiny-gamma limit accurate.
  const double log_value = theta * std::log(theta) - gamma1 * std::log(gamma1) - gamma2 * std::log(gamma2);
  return {std::exp(log_value), theta / gamma1, theta / gamma2};
}

/// Minimum of p1^g1 p2^g2 over 1/p1 + 1/p2 = 1/p: p^(g1+g2) times the
/// Hoelder split constant, at p_i = p (g1 + g2) / g_i.
inline SplitMinimum conjugate_split_min(double gamma1, double gamma2, double p) {
  if (!(gamma1 > 0.0) || !(gamma2 > 0.0)) {
    throw Error(ErrorCode::nonpositive_parameter, "split powers must be positive");
  }
  if (!(p >= 1.0)) throw Error(ErrorCode::invalid_parameter, "exponent must be >= 1");
  const auto base = holder_split_min(gamma1, gamma2);
  return {std::pow(p, gamma1 + gamma2) * base.value, p * base.first, p * base.second};
}

/// Single-exponent factor [p^(1/p) (p')^(-1/p')]^(1/2) of the sharp Young
/// constant, extended by continuity to 1 at p = 1 and p = inf.
inline double beckner_factor(double p) {
  if (p == 1.0 || std::isinf(p)) return 1.0;
  const double q = conjugate_exponent(p);
  return std::sqrt(std::exp(std::log(p) / p - std::log(q) / q));
}

struct BecknerConstant {
  double r = 1.0;  ///< output exponent, 1 + 1/r = 1/p1 + 1/p2; may be +inf
  double g = 1.0;  ///< [v(p1) v(p2) / v(r)]^n <= 1
};

/// Sharp constant of Young's convolution inequality on R^n.
inline BecknerConstant beckner_constant(int n, double p1, double p2) {
  if (n < 1) throw Error(ErrorCode::invalid_parameter, "dimension must be >= 1");
  if (!(p1 >= 1.0) || !(p2 >= 1.0)) throw Error(ErrorCode::invalid_parameter, "exponents must be >= 1");
  const double s = 1.0 / p1 + 1.0 / p2;
  constexpr double slack = 1e-12;
  if (s < 1.0 - slack || s > 2.0 + slack) {
    throw Error(ErrorCode::constraint_violation, "need 1 <= 1/p1 + 1/p2 <= 2");
  }
  const double inv_r = std::max(0.0, s - 1.0);
  BecknerConstant out;
  out.r = inv_r == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / inv_r;
  if (out.r < 1.0) out.r = 1.0;
  const double ratio = beckner_factor(p1) * beckner_factor(p2) / beckner_factor(out.r);
  // Mathematically <= 1; rounding in r can push the ratio a few ulps above.
  out.g = std::min(1.0, std::pow(ratio, n));
  return out;
}

}  // namespace gls
