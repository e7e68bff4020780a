#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gls/error.hpp"
#include "gls/extended.hpp"
#include "gls/layer_solution.hpp"
#include "gls/numeric.hpp"
#include "gls/psi.hpp"

namespace gls {

/// Data of a multivariate operation bound |V(f)|_{Theta(q)} <= K(q) prod |f_i|_{tau_i(q_i)}^{alpha_i}.
///
/// Only `arity` and `theta` are mandatory. The optional layer helpers let a
/// descriptor solve its constraint in closed form and bound the search range;
/// without them the solver falls back to bisection on Theta and [1, 1e6].
struct OperationDescriptor {
  using Point = std::span<const double>;

  std::string name = "operation";
  std::size_t arity = 1;
  std::function<bool(Point)> in_domain;              ///< D; default: all q_i >= 1
  std::function<double(Point)> theta;                ///< output exponent
  std::vector<std::function<double(double)>> tau;    ///< empty or null entries: identity
  std::vector<double> alpha;                         ///< empty: all ones
  std::function<ExtendedReal(Point)> k_const;        ///< empty: K = 1

  /// Solve Theta(q) = p for coordinate i with the other coordinates fixed.
  std::function<std::optional<double>(std::size_t, Point, double)> solve_coordinate;
  /// Search interval for a free coordinate on layer p.
  std::function<std::pair<double, double>(std::size_t, double)> coordinate_range;

  [[nodiscard]] bool contains(Point q) const {
    if (in_domain) return in_domain(q);
    return std::all_of(q.begin(), q.end(), [](double x) { return x >= 1.0; });
  }

  /// K extended by +inf off the domain.
  [[nodiscard]] ExtendedReal k_bar(Point q) const {
    if (!contains(q)) return ExtendedReal::infinity();
    return k_const ? k_const(q) : ExtendedReal(1.0);
  }

  [[nodiscard]] double tau_at(std::size_t i, double q) const {
    return (i < tau.size() && tau[i]) ? tau[i](q) : q;
  }

  [[nodiscard]] double alpha_at(std::size_t i) const { return i < alpha.size() ? alpha[i] : 1.0; }
};

struct LayerOptions {
  std::size_t scan_points = 512;
  double golden_rel_tol = 1e-12;
  double descent_rel_tol = 1e-10;
  std::size_t descent_scan_points = 64;
  int max_sweeps = 200;
  double default_upper = 1e6;
};

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// ln of K(q) prod psi_i(tau_i(q_i))^alpha_i; +inf when infeasible.
inline double layer_log_objective(const OperationDescriptor& desc, std::span<const PsiFunction> psis,
                                  std::span<const double> q) {
  const ExtendedReal k = desc.k_bar(q);
  if (k.is_infinite()) return kInf;
  double s = k.log();
  for (std::size_t i = 0; i < psis.size(); ++i) {
    const double a = desc.alpha_at(i);
    if (a == 0.0) continue;
    const ExtendedReal w = psis[i](desc.tau_at(i, q[i]));
    if (w.is_infinite()) return kInf;
    s += a * w.log();
  }
  return std::isnan(s) ? kInf : s;
}

/// Root of a monotone function on [lo, hi] by bisection in log space.
inline std::optional<double> monotone_root(const std::function<double(double)>& f, double lo, double hi) {
  double a = std::log(lo);
  double b = std::log(hi);
  double fa = f(lo);
  double fb = f(hi);
  if (std::isnan(fa) || std::isnan(fb)) return std::nullopt;
  if (fa == 0.0) return lo;
  if (fb == 0.0) return hi;
  if ((fa > 0.0) == (fb > 0.0)) return std::nullopt;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(std::exp(m));
    if (fm == 0.0) return std::exp(m);
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
    if (b - a < 1e-15) break;
  }
  return std::exp(0.5 * (a + b));
}

inline std::optional<double> solve_for(const OperationDescriptor& desc, std::size_t i, std::vector<double>& q,
                                       double p) {
  if (desc.solve_coordinate) return desc.solve_coordinate(i, q, p);
  const double saved = q[i];
  auto f = [&](double x) {
    q[i] = x;
    const double t = desc.theta(q);
    return std::isinf(t) ? 1e300 - p : t - p;
  };
  auto root = monotone_root(f, 1.0, 1e12);
  q[i] = saved;
  return root;
}

inline bool theta_matches(const OperationDescriptor& desc, std::span<const double> q, double p) {
  const double t = desc.theta(q);
  return std::abs(t - p) <= 1e-9 * std::max(1.0, p);
}

}  // namespace detail

/// kappa(p) = inf over the layer {q in D : Theta(q) = p} of
/// K(q) prod psi_i(tau_i(q_i))^alpha_i.
///
/// Coordinates whose psi is degenerate are pinned to the single exponent
/// where it is finite. With two free coordinates the layer is parameterized
/// by the first (log-grid scan, then golden-section refinement); with more,
/// a symmetric start is improved by cyclic pairwise coordinate descent.
inline LayerSolution kappa_layer_infimum(const OperationDescriptor& desc, std::span<const PsiFunction> psis, double p,
                                         const LayerOptions& opt = {}) {
  if (psis.size() != desc.arity || desc.arity == 0) {
    throw Error(ErrorCode::arity_mismatch, "descriptor arity differs from the number of generating functions");
  }
  if (!desc.theta) throw Error(ErrorCode::invalid_parameter, "descriptor has no exponent map");
  LayerSolution out;
  out.p = p;
  const std::size_t d = desc.arity;
  std::vector<double> q(d, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < d; ++i) {
    if (psis[i].domain().is_point()) {
      const double r = psis[i].domain().lower;
      if (i < desc.tau.size() && desc.tau[i]) {
        auto pinned = detail::monotone_root([&](double x) { return desc.tau[i](x) - r; }, 1.0, 1e12);
        if (!pinned) return out;
        q[i] = *pinned;
      } else {
        q[i] = r;
      }
    } else {
      free.push_back(i);
    }
  }

  auto finish = [&](double log_value, LayerStatus status) {
    if (!std::isfinite(log_value)) return out;
    out.kappa = exp_extended(log_value);
    out.argmin_q = q;
    out.status = status;
    return out;
  };

  if (free.empty()) {
    if (!detail::theta_matches(desc, q, p)) return out;
    return finish(detail::layer_log_objective(desc, psis, q), LayerStatus::boundary);
  }
  if (free.size() == 1) {
    auto x = detail::solve_for(desc, free[0], q, p);
    if (!x || !(*x >= 1.0)) return out;
    q[free[0]] = *x;
    return finish(detail::layer_log_objective(desc, psis, q), LayerStatus::interior);
  }

  auto range_of = [&](std::size_t i) {
    if (desc.coordinate_range) return desc.coordinate_range(i, p);
    double hi = opt.default_upper;
    if (!(i < desc.tau.size() && desc.tau[i])) hi = std::min(hi, psis[i].domain().upper);
    return std::pair<double, double>{1.0, hi};
  };

  // Objective along the layer as a function of coordinate i, with coordinate
  // j absorbing the constraint.
  auto along = [&](std::size_t i, std::size_t j) {
    return [&, i, j](double x) {
      q[i] = x;
      auto y = detail::solve_for(desc, j, q, p);
      if (!y || !(*y >= 1.0) || !std::isfinite(*y)) return detail::kInf;
      q[j] = *y;
      return detail::layer_log_objective(desc, psis, q);
    };
  };

  // Scan + golden refinement of one coordinate over [lo, hi]; leaves q at the best point.
  auto line_search = [&](std::size_t i, std::size_t j, double lo, double hi, std::size_t points,
                         bool& at_edge) -> double {
    auto f = along(i, j);
    if (!(hi > lo)) {
      at_edge = true;
      return f(lo);
    }
    const auto grid = log_spaced_grid(lo, hi, points);
    std::size_t best = 0;
    double best_val = detail::kInf;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double v = f(grid[k]);
      if (v < best_val) {
        best_val = v;
        best = k;
      }
    }
    double best_x = grid[best];
    if (std::isfinite(best_val)) {
      const double a = grid[best == 0 ? 0 : best - 1];
      const double b = grid[std::min(best + 1, grid.size() - 1)];
      auto g = golden_section_min([&](double t) { return f(std::exp(t)); }, std::log(a), std::log(b),
                                  opt.golden_rel_tol, 1e-15);
      if (g.value < best_val) {
        best_val = g.value;
        best_x = std::exp(g.x);
      }
    }
    at_edge = std::abs(best_x - lo) <= 1e-9 * lo || std::abs(best_x - hi) <= 1e-9 * hi;
    f(best_x);
    return best_val;
  };

  if (free.size() == 2) {
    const auto [lo, hi] = range_of(free[0]);
    bool at_edge = false;
    const double v = line_search(free[0], free[1], lo, hi, opt.scan_points, at_edge);
    return finish(v, at_edge ? LayerStatus::boundary : LayerStatus::interior);
  }

  // Symmetric start: all free coordinates share one value s with Theta = p.
  auto symmetric = [&](double s) {
    for (auto i : free) q[i] = s;
    const double t = desc.theta(q);
    return std::isinf(t) ? 1e300 - p : t - p;
  };
  auto s0 = detail::monotone_root(symmetric, 1.0, 1e12);
  if (!s0) return out;
  for (auto i : free) q[i] = *s0;
  double current = detail::layer_log_objective(desc, psis, q);
  if (!std::isfinite(current)) return out;
  bool at_edge = false;
  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    const double before = current;
    for (std::size_t k = 0; k < free.size(); ++k) {
      const std::size_t i = free[k];
      const std::size_t j = free[(k + 1) % free.size()];
      const auto saved = q;
      const auto [lo, hi] = range_of(i);
      const double a = std::max(lo, q[i] / 4.0);
      const double b = std::min(hi, q[i] * 4.0);
      bool edge = false;
      const double v = line_search(i, j, a, b, opt.descent_scan_points, edge);
      if (v < current) {
        current = v;
        at_edge = edge && (std::abs(q[i] - lo) <= 1e-9 * lo || std::abs(q[i] - hi) <= 1e-9 * hi);
      } else {
        q = saved;
      }
    }
    if (before - current <= opt.descent_rel_tol) break;
  }
  return finish(current, at_edge ? LayerStatus::boundary : LayerStatus::interior);
}

/// KappaSource backed by a descriptor and its input generating functions.
class DescriptorLayer final : public KappaSource {
 public:
  DescriptorLayer(OperationDescriptor desc, std::vector<PsiFunction> psis, PInterval domain, LayerOptions options = {})
      : desc_(std::move(desc)), psis_(std::move(psis)), domain_(domain), options_(options) {
    if (psis_.size() != desc_.arity) {
      throw Error(ErrorCode::arity_mismatch, "descriptor arity differs from the number of generating functions");
    }
  }

  [[nodiscard]] PInterval domain() const override { return domain_; }

  [[nodiscard]] std::string describe() const override {
    std::ostringstream os;
    os << "layer-infimum[" << desc_.name << "](";
    for (std::size_t i = 0; i < psis_.size(); ++i) os << (i ? ", " : "") << psis_[i].describe();
    os << ")";
    return os.str();
  }

  [[nodiscard]] const OperationDescriptor& descriptor() const noexcept { return desc_; }
  [[nodiscard]] std::span<const PsiFunction> inputs() const noexcept { return psis_; }

 protected:
  [[nodiscard]] LayerSolution compute(double p) const override {
    if (!domain_.contains(p)) {
      LayerSolution s;
      s.p = p;
      return s;
    }
    return kappa_layer_infimum(desc_, psis_, p, options_);
  }

 private:
  OperationDescriptor desc_;
  std::vector<PsiFunction> psis_;
  PInterval domain_;
  LayerOptions options_;
};

/// Wraps a descriptor layer as a generating function on `domain`.
inline PsiFunction make_layer_psi(OperationDescriptor desc, std::vector<PsiFunction> psis, PInterval domain,
                                  LayerOptions options = {}) {
  return make_layer_infimum(
      std::make_shared<const DescriptorLayer>(std::move(desc), std::move(psis), domain, options));
}

/// Full solution (argmin, status) behind a layer generating function at p;
/// nullopt for other forms.
inline std::optional<LayerSolution> layer_solution(const PsiFunction& psi, double p) {
  if (const auto* f = std::get_if<form::LayerInfimum>(&psi.form())) return f->source->solve(p);
  return std::nullopt;
}

}  // namespace gls
