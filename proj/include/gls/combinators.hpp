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
#include <vector>

#include "gls/error.hpp"
#include "gls/extended.hpp"
#include "gls/layer.hpp"
#include "gls/lemmas.hpp"
#include "gls/numeric.hpp"
#include "gls/psi.hpp"

namespace gls {

namespace detail {


inline PInterval output_domain_or_throw(double lo, double hi, bool lo_closed, bool hi_closed) {
  if (std::isinf(hi)) hi_closed = false;
  if (lo > hi || (lo == hi && !(lo_closed && hi_closed)) || std::isnan(lo) || std::isnan(hi)) {
    throw Error(ErrorCode::empty_output_domain, "no output exponent admits a feasible split");
  }
  return PInterval::make(lo, hi, lo_closed, hi_closed);
}

/// 1 / sum_i 1/q_i; OperationDescriptor::Point friendly.
inline double harmonic_theta(std::span<const double> q) {
  double s = 0.0;
  for (double x : q) s += 1.0 / x;
  return 1.0 / s;
}

/// Solve 1/q_i = 1/p - sum_{k != i} 1/q_k.
inline std::optional<double> harmonic_solve(std::size_t i, std::span<const double> q, double p) {
  double rest = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (k != i) rest += 1.0 / q[k];
  }
  const double inv = 1.0 / p - rest;
  if (!(inv > 0.0)) return std::nullopt;
  return 1.0 / inv;
}

}  // namespace detail

/// Bound for the pointwise product f1 f2 through the Hoelder split
/// |f1 f2|_p <= |f1|_{a p} |f2|_{b p}, 1/a + 1/b = 1:
/// kappa(p) = inf psi1(a p) psi2(b p).
inline PsiFunction combine_product(const PsiFunction& psi1, const PsiFunction& psi2, LayerOptions opt = {}) {
  const PInterval d1 = psi1.domain();
  const PInterval d2 = psi2.domain();
  const double h_lo = 1.0 / (1.0 / d1.lower + 1.0 / d2.lower);
  const double h_hi = 1.0 / (1.0 / d1.upper + 1.0 / d2.upper);
  const bool clipped = h_lo < 1.0;
  const auto domain = detail::output_domain_or_throw(clipped ? 1.0 : h_lo, h_hi,
                                                     clipped || (d1.lower_closed && d2.lower_closed),
                                                     d1.upper_closed && d2.upper_closed);
  OperationDescriptor desc;
  desc.name = "product";
  desc.arity = 2;
  desc.theta = detail::harmonic_theta;
  desc.solve_coordinate = detail::harmonic_solve;
  desc.coordinate_range = [d1, d2, opt](std::size_t, double p) {
    double lo = std::max(p, d1.lower);
    double hi = std::min(p * opt.default_upper, d1.upper);
    // Keep the partner exponent inside its own domain.
    const double room_hi = 1.0 / p - 1.0 / d2.upper;
    if (room_hi > 0.0) lo = std::max(lo, 1.0 / room_hi);
    const double room_lo = 1.0 / p - 1.0 / d2.lower;
    if (room_lo > 0.0) hi = std::min(hi, 1.0 / room_lo);
    return std::pair<double, double>{lo, std::max(lo, hi)};
  };
  return make_layer_psi(std::move(desc), {psi1, psi2}, domain, opt);
}

/// Tensor product f1(x1) f2(x2): norms factor exactly, so the bound is the
/// pointwise product nu1 nu2 with constant 1.
inline PsiFunction combine_tensor(const PsiFunction& nu1, const PsiFunction& nu2) {
  if (!nu1.domain().intersect(nu2.domain())) {
    throw Error(ErrorCode::empty_intersection, "tensor factors have disjoint domains");
  }
  return make_product(nu1, nu2);
}

/// Descriptor of Young's inequality on R^n with the sharp constant:
/// Theta(q) = 1 / (1/q1 + 1/q2 - 1), K = G(q1, q2).
inline OperationDescriptor convolution_descriptor(int n) {
  OperationDescriptor desc;
  desc.name = "convolution";
  desc.arity = 2;
  desc.in_domain = [](std::span<const double> q) {
    if (!(q[0] >= 1.0) || !(q[1] >= 1.0)) return false;
    const double s = 1.0 / q[0] + 1.0 / q[1];
    return s >= 1.0 - 1e-12 && s <= 2.0 + 1e-12;
  };
  desc.theta = [](std::span<const double> q) {
    const double s = 1.0 / q[0] + 1.0 / q[1] - 1.0;
    return s > 0.0 ? 1.0 / s : detail::kInf;
  };
  desc.k_const = [n](std::span<const double> q) { return ExtendedReal(beckner_constant(n, q[0], q[1]).g); };
  desc.solve_coordinate = [](std::size_t i, std::span<const double> q, double p) -> std::optional<double> {
    double inv = 1.0 + 1.0 / p - 1.0 / q[1 - i];
    if (inv > 1.0 && inv < 1.0 + 1e-14) inv = 1.0;
    if (!(inv > 0.0) || inv > 1.0) return std::nullopt;
    return 1.0 / inv;
  };
  return desc;
}

/// Convolution bound kappa(p) = inf G(p, p1, p2) z1(p1) z2(p2) along
/// 1/p1 + 1/p2 = 1 + 1/p, including the endpoints p_i = 1.
inline PsiFunction combine_convolution(const PsiFunction& zeta1, const PsiFunction& zeta2, int n,
                                       LayerOptions opt = {}) {
  if (n < 1) throw Error(ErrorCode::invalid_parameter, "dimension must be >= 1");
  const PInterval d1 = zeta1.domain();
  const PInterval d2 = zeta2.domain();
  const double top = 1.0 / d1.lower + 1.0 / d2.lower - 1.0;
  const double bottom = 1.0 / d1.upper + 1.0 / d2.upper - 1.0;
  if (!(top > 0.0)) throw Error(ErrorCode::empty_output_domain, "inputs admit no finite output exponent");
  const double lo = std::max(1.0, 1.0 / top);
  const double hi = bottom > 0.0 ? 1.0 / bottom : detail::kInf;
  const auto domain = detail::output_domain_or_throw(lo, hi, d1.lower_closed && d2.lower_closed,
                                                     d1.upper_closed && d2.upper_closed);
  auto desc = convolution_descriptor(n);
  desc.coordinate_range = [d1, d2](std::size_t, double p) {
    double lo1 = std::max(1.0, d1.lower);
    double hi1 = std::min(p, d1.upper);
    const double from_hi = 1.0 + 1.0 / p - 1.0 / d2.upper;
    if (from_hi > 0.0) lo1 = std::max(lo1, 1.0 / from_hi);
    const double from_lo = 1.0 + 1.0 / p - 1.0 / d2.lower;
    if (from_lo > 0.0) hi1 = std::min(hi1, 1.0 / from_lo);
    return std::pair<double, double>{lo1, std::max(lo1, hi1)};
  };
  return make_layer_psi(std::move(desc), {zeta1, zeta2}, domain, opt);
}

struct InfimalConvolutionBound {
  PsiFunction kappa;       ///< m^{d/p} psi(p), against the sum of input GLS norms
  double relaxed_constant; ///< p-free constant m^d
};

/// m-fold infimal convolution on R^d: |f1 [] ... [] fm|_p <= m^{d/p} sum |f_j|_p.
inline InfimalConvolutionBound combine_infimal_convolution(const PsiFunction& psi, int d, int m) {
  if (d < 1 || m < 1) throw Error(ErrorCode::invalid_parameter, "need d >= 1 and m >= 1");
  OperationDescriptor desc;
  std::ostringstream name;
  name << "infimal-convolution(d=" << d << ", m=" << m << ")";
  desc.name = name.str();
  desc.arity = 1;
  desc.theta = [](std::span<const double> q) { return q[0]; };
  desc.solve_coordinate = [](std::size_t, std::span<const double>, double p) -> std::optional<double> { return p; };
  const double md = static_cast<double>(m);
  desc.k_const = [md, d](std::span<const double> q) { return ExtendedReal(std::pow(md, d / q[0])); };
  auto kappa = make_layer_psi(std::move(desc), {psi}, psi.domain());
  return {kappa, std::pow(md, d)};
}

/// A numeric bound reported next to the closed-form envelope it is compared to.
struct EnvelopedBound {
  PsiFunction kappa;
  std::function<double(double)> envelope;
  double envelope_exponent = 0.0;
};

namespace detail {

/// d inputs in G psi_gamma under a harmonic split with per-factor weight
/// q^extra / (q - 1); constant `k_scale`.
inline PsiFunction harmonic_power_layer(const std::string& name, double gamma, int d, double extra, double k_scale,
                                        LayerOptions opt) {
  OperationDescriptor desc;
  desc.name = name;
  desc.arity = static_cast<std::size_t>(d);
  desc.in_domain = [](std::span<const double> q) {
    return std::all_of(q.begin(), q.end(), [](double x) { return x > 1.0; });
  };
  desc.theta = harmonic_theta;
  desc.solve_coordinate = harmonic_solve;
  desc.k_const = [extra, k_scale](std::span<const double> q) {
    double log_k = std::log(k_scale);
    for (double x : q) log_k += extra * std::log(x) - std::log(x - 1.0);
    return exp_extended(log_k);
  };
  desc.coordinate_range = [opt](std::size_t, double p) {
    return std::pair<double, double>{std::max(p, 1.0), p * opt.default_upper};
  };
  std::vector<PsiFunction> psis(static_cast<std::size_t>(d), make_power(1.0, gamma));
  const PInterval domain = d == 1 ? PInterval::from(1.0, false) : PInterval::from(1.0);
  return make_layer_psi(std::move(desc), std::move(psis), domain, opt);
}

}  // namespace detail

/// Strong maximal operator of d inputs in G psi_gamma:
/// kappa(p) = c^d min_{sum 1/p_i = 1/p} prod p_i^{gamma+1} / (p_i - 1).
/// The envelope is c^d (d p / (d p - 1))^{d (gamma + 1)}.
inline EnvelopedBound combine_maximal(double gamma, int d, double c_env = 1.0, LayerOptions opt = {}) {
  if (!(gamma > 0.0) || d < 1 || !(c_env > 0.0)) {
    throw Error(ErrorCode::invalid_parameter, "need gamma > 0, d >= 1, c_env > 0");
  }
  const double scale = std::pow(c_env, d);
  auto kappa = detail::harmonic_power_layer("strong-maximal", gamma, d, 1.0, scale, opt);
  const double dd = d;
  auto envelope = [scale, dd, gamma](double p) {
    return scale * std::pow(dd * p / (dd * p - 1.0), dd * (gamma + 1.0));
  };
  return {kappa, envelope, dd * (gamma + 1.0)};
}

/// Hausdorff-type operator of m inputs in G psi_gamma with per-factor weight
/// p_j^2 / (p_j - 1): kappa(p) = c min prod p_j^{gamma+2} / (p_j - 1).
/// The envelope is c p^{m (gamma + 2)}.
inline EnvelopedBound combine_hausdorff(double gamma, int m, double c_env = 1.0, LayerOptions opt = {}) {
  if (!(gamma > 0.0) || m < 1 || !(c_env > 0.0)) {
    throw Error(ErrorCode::invalid_parameter, "need gamma > 0, m >= 1, c_env > 0");
  }
  auto kappa = detail::harmonic_power_layer("hausdorff", gamma, m, 2.0, c_env, opt);
  const double exponent = m * (gamma + 2.0);
  auto envelope = [c_env, exponent](double p) { return c_env * std::pow(p, exponent); };
  return {kappa, envelope, exponent};
}

/// Multiplicative Toeplitz bound C(g1, g2) (p / (p - 1))^{g1 + g2} on (1, inf),
/// C the Hoelder split constant.
inline PsiFunction combine_toeplitz(double gamma1, double gamma2) {
  const auto split = holder_split_min(gamma1, gamma2);
  const double theta = gamma1 + gamma2;
  return make_rational(split.value, theta, theta);
}

/// Mixed-norm value l[L](p, p1, p2); +inf where the kernel norm is infinite
/// or undefined.
using KernelNorm = std::function<ExtendedReal(double p, double p1, double p2)>;

class BilinearLayer final : public KappaSource {
 public:
  BilinearLayer(PsiFunction psi1, PsiFunction psi2, KernelNorm kernel, PInterval domain)
      : psi1_(std::move(psi1)), psi2_(std::move(psi2)), kernel_(std::move(kernel)), domain_(domain) {}

  [[nodiscard]] PInterval domain() const override { return domain_; }
  [[nodiscard]] std::string describe() const override {
    return "bilinear-integral(" + psi1_.describe() + ", " + psi2_.describe() + ")";
  }

 protected:
  [[nodiscard]] LayerSolution compute(double p) const override {
    LayerSolution out;
    out.p = p;
    if (!domain_.contains(p)) return out;
    auto objective = [&](double p1, double p2) {
      const ExtendedReal l = kernel_(p, p1, p2);
      const ExtendedReal a = psi1_(p1);
      const ExtendedReal b = psi2_(p2);
      if (l.is_infinite() || a.is_infinite() || b.is_infinite()) return detail::kInf;
      return l.log() + a.log() + b.log();
    };
    const auto g1 = candidates(psi1_.domain(), p);
    const auto g2 = candidates(psi2_.domain(), p);
    double best = detail::kInf;
    double b1 = p;
    double b2 = p;
    std::size_t i1 = 0;
    std::size_t i2 = 0;
    for (std::size_t i = 0; i < g1.size(); ++i) {
      for (std::size_t j = 0; j < g2.size(); ++j) {
        const double v = objective(g1[i], g2[j]);
        if (v < best) {
          best = v;
          b1 = g1[i];
          b2 = g2[j];
          i1 = i;
          i2 = j;
        }
      }
    }
    if (!std::isfinite(best)) return out;
    // Alternating golden refinement inside the neighbouring grid cells.
    if (g1.size() > 2 && g2.size() > 2) {
      for (int round = 0; round < 8; ++round) {
        const double before = best;
        const auto r1 = golden_section_min([&](double t) { return objective(std::exp(t), b2); },
                                           std::log(g1[i1 == 0 ? 0 : i1 - 1]),
                                           std::log(g1[std::min(i1 + 1, g1.size() - 1)]), 1e-12, 1e-15);
        if (r1.value < best) {
          best = r1.value;
          b1 = std::exp(r1.x);
        }
        const auto r2 = golden_section_min([&](double t) { return objective(b1, std::exp(t)); },
                                           std::log(g2[i2 == 0 ? 0 : i2 - 1]),
                                           std::log(g2[std::min(i2 + 1, g2.size() - 1)]), 1e-12, 1e-15);
        if (r2.value < best) {
          best = r2.value;
          b2 = std::exp(r2.x);
        }
        if (before - best <= 1e-13) break;
      }
    }
    out.kappa = exp_extended(best);
    out.argmin_q = {b1, b2};
    out.status = LayerStatus::interior;
    return out;
  }

 private:
  static std::vector<double> candidates(const PInterval& d, double p) {
    if (d.is_point()) return {d.lower};
    const double lo = d.lower_closed ? d.lower : d.lower * (1.0 + 1e-9);
    const double hi = std::min(1e3, d.upper_closed ? d.upper : d.upper * (1.0 - 1e-9));
    auto g = log_spaced_grid(lo, std::max(lo, hi), 48);
    if (d.contains(p)) {
      g.push_back(p);
      std::sort(g.begin(), g.end());
    }
    return g;
  }

  PsiFunction psi1_;
  PsiFunction psi2_;
  KernelNorm kernel_;
  PInterval domain_;
};

/// Bilinear integral operator with kernel L:
/// kappa(p) = inf_{p1, p2} l[L](p, p1, p2) psi1(p1) psi2(p2).
inline PsiFunction combine_bilinear_integral(const PsiFunction& psi1, const PsiFunction& psi2, KernelNorm kernel_norm,
                                             PInterval output_domain = PInterval::from(1.0, false)) {
  if (!kernel_norm) throw Error(ErrorCode::invalid_parameter, "missing kernel norm");
  return make_layer_infimum(std::make_shared<const BilinearLayer>(psi1, psi2, std::move(kernel_norm), output_domain));
}

/// Bounded kernel on probability spaces: L_bar psi1 psi2.
inline PsiFunction combine_bilinear_bounded(const PsiFunction& psi1, const PsiFunction& psi2, double l_bar) {
  return make_scaled(l_bar, make_product(psi1, psi2));
}

/// Least-squares slope of ln kappa against ln p over a log grid.
inline LineFit fit_growth_exponent(const PsiFunction& kappa, double p_lo, double p_hi, std::size_t count = 32) {
  std::vector<double> x;
  std::vector<double> y;
  for (double p : log_spaced_grid(p_lo, p_hi, count)) {
    const ExtendedReal v = kappa(p);
    if (v.is_infinite()) continue;
    x.push_back(std::log(p));
    y.push_back(v.log());
  }
  return least_squares_line(x, y);
}

}  // namespace gls
