#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gls/error.hpp"
#include "gls/extended.hpp"
#include "gls/numeric.hpp"
#include "gls/psi.hpp"

namespace gls {

/// Value of the conjugate h*(v) = sup_p (p v - h(p)) together with the
/// location of the supremum. `value` is +inf when the supremum diverges.
struct ConjugateResult {
  double value = 0.0;
  double maximizer = 1.0;
  bool boundary = false;

  [[nodiscard]] bool diverges() const noexcept { return std::isinf(value); }
};

struct ConjugateOptions {
  std::size_t scan_points = 512;
  double rel_tol = 1e-10;
  int max_expansions = 10;
  double expansion_factor = 4.0;
};

namespace detail {

/// p v - p ln psi(p); -inf where psi is infinite.
inline double conjugate_objective(const PsiFunction& psi, double v, double p) {
  const ExtendedReal w = psi(p);
  if (w.is_infinite()) return -std::numeric_limits<double>::infinity();
  return p * v - p * w.log();
}

// Open endpoints are approached, never evaluated.
inline double inner_lower(const PInterval& d) { return d.lower_closed ? d.lower : d.lower * (1.0 + 1e-12); }
inline double inner_upper(const PInterval& d) { return d.upper_closed ? d.upper : d.upper * (1.0 - 1e-12); }

/// Dense log-grid scan of [lo, hi], then golden-section refinement around
/// the best grid point. Returns the best of both.
inline ConjugateResult scan_and_refine(const PsiFunction& psi, double v, double lo, double hi,
                                       const ConjugateOptions& opt, std::size_t& best_index) {
  const auto grid = log_spaced_grid(lo, hi, opt.scan_points);
  best_index = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double val = conjugate_objective(psi, v, grid[i]);
    if (val > best) {
      best = val;
      best_index = i;
    }
  }
  ConjugateResult r{best, grid[best_index], false};
  const double a = grid[best_index == 0 ? 0 : best_index - 1];
  const double b = grid[std::min(best_index + 1, grid.size() - 1)];
  if (b > a && std::isfinite(best)) {
    auto neg = [&](double x) { return -conjugate_objective(psi, v, std::exp(x)); };
    const auto g = golden_section_min(neg, std::log(a), std::log(b), opt.rel_tol, 1e-14);
    if (-g.value > r.value) r = ConjugateResult{-g.value, std::exp(g.x), false};
  }
  return r;
}

}  // namespace detail

/// Young-Fenchel conjugate of h(p) = p ln psi(p), with the supremum taken
/// over the domain of psi only. Unbounded domains grow the search bracket
/// geometrically; persistent growth across all expansions reports +inf.
inline ConjugateResult fenchel_conjugate(const PsiFunction& psi, double v, const ConjugateOptions& opt = {}) {
  const PInterval& d = psi.domain();
  if (d.is_point()) {
    return {detail::conjugate_objective(psi, v, d.lower), d.lower, true};
  }
  const double lo = detail::inner_lower(d);
  ConjugateResult r;
  std::size_t idx = 0;
  if (d.is_bounded()) {
    const double hi = detail::inner_upper(d);
    r = detail::scan_and_refine(psi, v, lo, hi, opt, idx);
    r.boundary = idx == 0 || idx + 1 == opt.scan_points;
    return r;
  }
  double hi = 16.0 * lo;
  for (int expansion = 0;; ++expansion) {
    r = detail::scan_and_refine(psi, v, lo, hi, opt, idx);
    if (idx + 1 < opt.scan_points) break;
    if (expansion == opt.max_expansions) {
      return {std::numeric_limits<double>::infinity(), hi, true};
    }
    hi *= opt.expansion_factor;
  }
  r.boundary = idx == 0;
  return r;
}

/// Exponential tail bound exp(-h*(ln(y / norm))) valid for y >= norm,
/// clamped to [0, 1].
inline double tail_bound(const PsiFunction& psi, double norm, double y) {
  if (!(norm > 0.0) || !std::isfinite(norm)) throw Error(ErrorCode::invalid_parameter, "norm must be positive");
  if (!(y >= norm)) throw Error(ErrorCode::below_validity, "tail bound holds only for y >= norm");
  const auto c = fenchel_conjugate(psi, std::log(y / norm));
  if (c.diverges()) return 0.0;
  return std::min(1.0, std::exp(-c.value));
}

/// Closed-form tail exp(-gamma e^{-1} (y/K)^{1/gamma}) of the power family.
inline double power_tail_closed_form(double gamma, double k, double y) {
  if (!(gamma > 0.0) || !(k > 0.0)) throw Error(ErrorCode::invalid_parameter, "need gamma > 0 and K > 0");
  if (!(y >= k)) throw Error(ErrorCode::below_validity, "closed-form tail holds only for y >= K");
  return std::exp(-gamma * std::exp(-1.0) * std::pow(y / k, 1.0 / gamma));
}

struct TailPoint {
  double y = 0.0;
  double t = 0.0;
};

/// Nonincreasing tail function y -> T(y) on a strictly increasing level grid.
class TailCurve {
 public:
  TailCurve() = default;

  explicit TailCurve(std::vector<TailPoint> points,
                     double total_measure = std::numeric_limits<double>::infinity())
      : points_(std::move(points)) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const auto& pt = points_[i];
      if (!(pt.y > 0.0) || !std::isfinite(pt.y)) throw Error(ErrorCode::invalid_parameter, "tail levels must be > 0");
      if (!(pt.t >= 0.0) || pt.t > total_measure * (1.0 + 1e-12)) {
        throw Error(ErrorCode::invalid_parameter, "tail values must lie in [0, total measure]");
      }
      if (i > 0) {
        if (!(pt.y > points_[i - 1].y)) throw Error(ErrorCode::invalid_parameter, "tail levels must increase");
        if (pt.t > points_[i - 1].t) throw Error(ErrorCode::invalid_parameter, "tail values must not increase");
      }
    }
  }

  [[nodiscard]] std::span<const TailPoint> points() const noexcept { return points_; }
  [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }

 private:
  std::vector<TailPoint> points_;
};

inline constexpr const char* kTailCurveMagic = "glstail v1";

inline TailCurve read_tail_curve(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::parse_error, "missing glstail header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTailCurveMagic) throw Error(ErrorCode::parse_error, "bad tail header: " + line);
  std::vector<TailPoint> pts;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    TailPoint pt;
    if (tab == std::string::npos) throw Error(ErrorCode::parse_error, "line " + std::to_string(lineno) + ": expected y<TAB>t");
    std::istringstream ys(line.substr(0, tab));
    std::istringstream ts(line.substr(tab + 1));
    if (!(ys >> pt.y) || !(ts >> pt.t) || !(ys >> std::ws).eof() || !(ts >> std::ws).eof()) {
      throw Error(ErrorCode::parse_error, "line " + std::to_string(lineno) + ": malformed number");
    }
    pts.push_back(pt);
  }
  try {
    return TailCurve(std::move(pts));
  } catch (const Error& e) {
    throw Error(ErrorCode::parse_error, e.what());
  }
}

inline void write_tail_curve(std::ostream& out, const TailCurve& curve) {
  out << kTailCurveMagic << '\n';
  char buf[64];
  for (const auto& pt : curve.points()) {
    std::snprintf(buf, sizeof buf, "%.17g\t%.17g\n", pt.y, pt.t);
    out << buf;
  }
}

struct PowerFit {
  double gamma = 0.0;
  double k = 0.0;
  double residual = 0.0;
  std::size_t points_used = 0;
};

/// Fits the power-family tail shape to an observed tail on a probability
/// space: ln(-ln t) = (1/gamma) ln y - (1/gamma) ln K + ln(gamma / e),
/// using only points with 0 < t <= 0.5. Any multiplicative constant in
/// the inverse relation ends up in K.
inline PowerFit fit_power_psi_from_tail(const TailCurve& tail) {
  std::size_t open_unit = 0;
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& pt : tail.points()) {
    if (pt.t > 0.0 && pt.t < 1.0) ++open_unit;
    if (pt.t > 0.0 && pt.t <= 0.5) {
      x.push_back(std::log(pt.y));
      y.push_back(std::log(-std::log(pt.t)));
    }
  }
  if (open_unit < 3 || x.size() < 2) {
    throw Error(ErrorCode::insufficient_points, "tail fit needs at least 3 points with 0 < t < 1");
  }
  const LineFit line = least_squares_line(x, y);
  if (!(line.slope > 0.0)) throw Error(ErrorCode::degenerate_fit, "tail does not decay with the level");
  PowerFit fit;
  fit.gamma = 1.0 / line.slope;
  fit.k = std::exp(fit.gamma * (std::log(fit.gamma) - 1.0 - line.intercept));
  fit.residual = line.rms_residual;
  fit.points_used = x.size();
  return fit;
}

}  // namespace gls
