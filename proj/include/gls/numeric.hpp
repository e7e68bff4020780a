#pragma once

// Small deterministic numerical helpers shared by the solvers.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "gls/error.hpp"

namespace gls {

/// `count` points from `lo` to `hi` inclusive, equally spaced in log(p).
inline std::vector<double> log_spaced_grid(double lo, double hi, std::size_t count = 256) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 2) {
    throw Error(ErrorCode::invalid_parameter, "log grid needs 0 < lo <= hi and count >= 2");
  }
  std::vector<double> grid(count);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

inline std::vector<double> linear_grid(double lo, double hi, std::size_t count) {
  if (!(hi >= lo) || count < 2) throw Error(ErrorCode::invalid_parameter, "linear grid needs lo <= hi, count >= 2");
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  grid.back() = hi;
  return grid;
}

struct ScalarOptimum {
  double x = 0.0;
  double value = 0.0;
};

/// Golden-section minimization of `f` on [lo, hi]; stops when the bracket is
/// below `rel_tol` relative to its midpoint magnitude (plus `abs_tol`).
/// Non-finite values (+inf for infeasible points) are handled by comparison.
inline ScalarOptimum golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                                        double rel_tol = 1e-10, double abs_tol = 1e-300,
                                        int max_iter = 400) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter; ++it) {
    if (std::abs(b - a) <= rel_tol * (std::abs(a) + std::abs(b)) * 0.5 + abs_tol) break;
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? ScalarOptimum{c, fc} : ScalarOptimum{d, fd};
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
};

/// Ordinary least squares y = slope * x + intercept. Throws degenerate-fit
/// when x has zero variance.
inline LineFit least_squares_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::insufficient_points, "line fit needs at least two paired points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 1e-300)) throw Error(ErrorCode::degenerate_fit, "zero variance in abscissa");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.slope * x[i] + fit.intercept);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / n);
  return fit;
}

/// Hoelder conjugate p' = p / (p - 1), with 1' = inf and inf' = 1.
inline double conjugate_exponent(double p) {
  if (std::isinf(p)) return 1.0;
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  return p / (p - 1.0);
}

}  // namespace gls
