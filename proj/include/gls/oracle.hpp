#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gls/error.hpp"
#include "gls/fenchel.hpp"
#include "gls/grid_function.hpp"
#include "gls/numeric.hpp"
#include "gls/psi.hpp"

namespace gls {

namespace detail {

inline void check_cost(long double cost, const char* what) {
  if (cost > static_cast<long double>(max_cells())) {
    throw Error(ErrorCode::resource_limit, std::string(what) + " exceeds the configured cell cap");
  }
}

/// Multi-index of every flat position of a row-major grid.
inline std::vector<std::vector<std::size_t>> unravel_all(const std::vector<Axis>& axes) {
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.n;
  std::vector<std::vector<std::size_t>> out(total, std::vector<std::size_t>(axes.size(), 0));
  std::vector<std::size_t> idx(axes.size(), 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    out[flat] = idx;
    for (std::size_t k = axes.size(); k-- > 0;) {
      if (++idx[k] < axes[k].n) break;
      idx[k] = 0;
    }
  }
  return out;
}

}  // namespace detail

/// (f1 f2)(x) on a shared grid.
inline GridFunction pointwise_product(const GridFunction& f1, const GridFunction& f2) {
  if (!f1.same_shape(f2)) throw Error(ErrorCode::incompatible_grids, "pointwise product needs identical grids");
  std::vector<double> v(f1.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f1.values()[i] * f2.values()[i];
  return GridFunction(f1.axes(), f1.measure(), f1.periodic(), std::move(v));
}

/// (f (x) g)(x, y) = f(x) g(y) on the product grid and product measure.
inline GridFunction tensor_product(const GridFunction& f, const GridFunction& g) {
  if (f.measure() != g.measure()) throw Error(ErrorCode::incompatible_grids, "tensor factors need the same measure");
  auto axes = f.axes();
  axes.insert(axes.end(), g.axes().begin(), g.axes().end());
  std::vector<double> v;
  v.reserve(f.size() * g.size());
  for (double a : f.values()) {
    for (double b : g.values()) v.push_back(a * b);
  }
  return GridFunction(std::move(axes), f.measure(), f.periodic() && g.periodic(), std::move(v));
}

/// Convolution on the torus with the normalized weight 1/vol(box):
/// (f * g)(x) = vol^{-1} int f(x - y) g(y) dy.
inline GridFunction periodic_convolution(const GridFunction& f, const GridFunction& g) {
  if (!f.periodic() || !g.periodic()) throw Error(ErrorCode::missing_periodicity, "convolution needs periodic grids");
  if (!f.same_shape(g)) throw Error(ErrorCode::incompatible_grids, "convolution needs identical grids");
  const std::size_t total = f.size();
  detail::check_cost(static_cast<long double>(total) * total, "periodic convolution");
  const auto idx = detail::unravel_all(f.axes());
  const auto strides = f.strides();
  const std::size_t d = f.dims();
  std::vector<double> out(total, 0.0);
  const double w = 1.0 / static_cast<double>(total);
  for (std::size_t k = 0; k < total; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < total; ++j) {
      std::size_t src = 0;
      for (std::size_t a = 0; a < d; ++a) {
        const std::size_t n = f.axes()[a].n;
        src += ((idx[k][a] + n - idx[j][a]) % n) * strides[a];
      }
      s += f.values()[src] * g.values()[j];
    }
    out[k] = s * w;
  }
  return GridFunction(f.axes(), f.measure(), true, std::move(out));
}

struct InfimalConvolutionResult {
  GridFunction g;            ///< min-plus values on the Minkowski-sum grid
  std::vector<char> window;  ///< 1 where the minimizing shift is interior
  [[nodiscard]] std::size_t window_size() const {
    return static_cast<std::size_t>(std::count(window.begin(), window.end(), char{1}));
  }
};

/// (f1 [] f2)(x) = min_y f1(x - y) + f2(y), exhaustive over grid shifts.
/// Inputs are +inf outside their box, so the output lives on the sum grid:
/// 2n - 1 cells per axis of the same spacing.
inline InfimalConvolutionResult infimal_convolution(const GridFunction& f1, const GridFunction& f2) {
  if (!f1.same_shape(f2)) throw Error(ErrorCode::incompatible_grids, "infimal convolution needs identical grids");
  if (f1.periodic()) throw Error(ErrorCode::incompatible_grids, "infimal convolution expects a non-periodic grid");
  if (f1.measure() == Measure::uniprob) {
    throw Error(ErrorCode::incompatible_grids, "infimal convolution needs a translation-invariant measure");
  }
  const std::size_t total = f1.size();
  detail::check_cost(static_cast<long double>(total) * total, "infimal convolution");
  const std::size_t d = f1.dims();
  std::vector<Axis> out_axes(d);
  for (std::size_t a = 0; a < d; ++a) {
    const Axis& in = f1.axes()[a];
    const double h = in.spacing();
    out_axes[a] = Axis{2.0 * in.lo + 0.5 * h, 2.0 * in.hi - 0.5 * h, 2 * in.n - 1};
  }
  std::vector<std::size_t> out_strides(d, 1);
  for (std::size_t a = d; a-- > 1;) out_strides[a - 1] = out_strides[a] * out_axes[a].n;
  const auto idx = detail::unravel_all(f1.axes());
  std::vector<std::size_t> offset(total, 0);
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t a = 0; a < d; ++a) offset[i] += idx[i][a] * out_strides[a];
  }
  std::size_t out_total = 1;
  for (const auto& a : out_axes) out_total *= a.n;
  std::vector<double> best(out_total, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> arg(out_total, total);
  const auto v1 = f1.values();
  const auto v2 = f2.values();
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t j = 0; j < total; ++j) {
      const std::size_t o = offset[i] + offset[j];
      const double v = v1[i] + v2[j];
      if (v < best[o] || (v == best[o] && j < arg[o])) {
        best[o] = v;
        arg[o] = j;
      }
    }
  }
  std::vector<char> window(out_total, 1);
  std::vector<std::size_t> k(d, 0);
  for (std::size_t o = 0; o < out_total; ++o) {
    const auto& j = idx[arg[o]];
    for (std::size_t a = 0; a < d; ++a) {
      const std::size_t n = f1.axes()[a].n;
      const std::size_t lo = k[a] + 1 > n ? k[a] + 1 - n : 0;
      const std::size_t hi = std::min(n - 1, k[a]);
      if (!(j[a] > lo && j[a] < hi)) window[o] = 0;
    }
    for (std::size_t a = d; a-- > 0;) {
      if (++k[a] < out_axes[a].n) break;
      k[a] = 0;
    }
  }
  return {GridFunction(std::move(out_axes), f1.measure(), false, std::move(best)), std::move(window)};
}

/// M[f_1..f_m](x) = sup over axis-parallel boxes R containing x of
/// prod_i (1/|R|) int_R |f_i|, exhaustive over all grid boxes.
inline GridFunction strong_maximal(std::span<const GridFunction> fs) {
  if (fs.empty()) throw Error(ErrorCode::arity_mismatch, "maximal operator needs at least one input");
  for (const auto& f : fs) {
    if (!f.same_shape(fs[0])) throw Error(ErrorCode::incompatible_grids, "maximal operator needs identical grids");
  }
  const auto& axes = fs[0].axes();
  const std::size_t d = axes.size();
  long double cost = static_cast<long double>(fs.size());
  for (const auto& a : axes) cost *= static_cast<long double>(a.n) * (a.n + 1) / 2.0L;
  detail::check_cost(cost, "strong maximal scan");

  // Inclusive prefix sums of |f_i| on the (n+1)^d padded grid.
  std::vector<std::size_t> pn(d);
  std::vector<std::size_t> ps(d, 1);
  for (std::size_t a = 0; a < d; ++a) pn[a] = axes[a].n + 1;
  for (std::size_t a = d; a-- > 1;) ps[a - 1] = ps[a] * pn[a];
  const std::size_t ptotal = ps[0] * pn[0];
  const auto strides = fs[0].strides();
  std::vector<std::vector<double>> prefix;
  for (const auto& f : fs) {
    std::vector<double> p(ptotal, 0.0);
    std::vector<std::size_t> idx(d, 0);
    for (std::size_t flat = 0; flat < ptotal; ++flat) {
      bool edge = false;
      std::size_t src = 0;
      for (std::size_t a = 0; a < d; ++a) {
        if (idx[a] == 0) edge = true;
        else src += (idx[a] - 1) * strides[a];
      }
      if (!edge) p[flat] = std::abs(f.values()[src]);
      for (std::size_t a = d; a-- > 0;) {
        if (++idx[a] < pn[a]) break;
        idx[a] = 0;
      }
    }
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t flat = 0; flat < ptotal; ++flat) {
        if ((flat / ps[a]) % pn[a] != 0) p[flat] += p[flat - ps[a]];
      }
    }
    prefix.push_back(std::move(p));
  }

  const std::size_t total = fs[0].size();
  std::vector<double> g(total, 0.0);
  std::vector<double> sub;
  std::vector<std::size_t> a_idx(d, 0);
  std::vector<std::size_t> ext(d);
  std::vector<std::size_t> es(d);
  std::vector<std::size_t> b(d);
  const std::size_t corners = std::size_t{1} << d;
  for (std::size_t a_flat = 0; a_flat < total; ++a_flat) {
    std::size_t sub_total = 1;
    for (std::size_t a = 0; a < d; ++a) {
      ext[a] = axes[a].n - a_idx[a];
      sub_total *= ext[a];
    }
    es[d - 1] = 1;
    for (std::size_t a = d; a-- > 1;) es[a - 1] = es[a] * ext[a];
    sub.assign(sub_total, 0.0);
    for (std::size_t s = 0; s < sub_total; ++s) {
      std::size_t count = 1;
      for (std::size_t a = 0; a < d; ++a) {
        b[a] = a_idx[a] + (s / es[a]) % ext[a];
        count *= b[a] - a_idx[a] + 1;
      }
      double prod = 1.0;
      for (const auto& p : prefix) {
        double box = 0.0;
        for (std::size_t c = 0; c < corners; ++c) {
          std::size_t at = 0;
          int sign = 1;
          for (std::size_t a = 0; a < d; ++a) {
            if (c >> a & 1U) {
              at += a_idx[a] * ps[a];
              sign = -sign;
            } else {
              at += (b[a] + 1) * ps[a];
            }
          }
          box += sign * p[at];
        }
        prod *= std::max(0.0, box) / static_cast<double>(count);
      }
      sub[s] = prod;
    }
    // Suffix maxima: sub[x] becomes the best box with corners a and some b >= x.
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t s = sub_total; s-- > 0;) {
        if ((s / es[a]) % ext[a] + 1 < ext[a]) sub[s] = std::max(sub[s], sub[s + es[a]]);
      }
    }
    for (std::size_t s = 0; s < sub_total; ++s) {
      std::size_t at = 0;
      for (std::size_t a = 0; a < d; ++a) at += (a_idx[a] + (s / es[a]) % ext[a]) * strides[a];
      g[at] = std::max(g[at], sub[s]);
    }
    for (std::size_t a = d; a-- > 0;) {
      if (++a_idx[a] < axes[a].n) break;
      a_idx[a] = 0;
    }
  }
  return GridFunction(axes, fs[0].measure(), fs[0].periodic(), std::move(g));
}

/// Multiplicative Toeplitz operator g_n = sum_k f(n/k) x_k.
inline SequenceFunction toeplitz(const SequenceFunction& f, const SequenceFunction& x) {
  detail::check_cost(static_cast<long double>(f.support().size()) * x.support().size(), "toeplitz sum");
  SequenceFunction::Map g;
  for (const auto& [k, xk] : x.support()) {
    if (!k.is_integer()) throw Error(ErrorCode::invalid_parameter, "toeplitz input must be indexed by integers");
    for (const auto& [r, fr] : f.support()) {
      if (k.num % r.den != 0) continue;
      g[Rational{k.num / r.den * r.num, 1}] += fr * xk;
    }
  }
  return SequenceFunction(std::move(g));
}

namespace detail {

inline void check_kernel_axes(const GridFunction& kernel, const GridFunction& f1, const GridFunction& f2) {
  if (kernel.dims() != 3) throw Error(ErrorCode::incompatible_grids, "kernel must be a 3-axis grid");
  if (f1.dims() != 1 || f2.dims() != 1 || f1.axes()[0] != kernel.axes()[1] || f2.axes()[0] != kernel.axes()[2] ||
      f1.measure() != kernel.measure() || f2.measure() != kernel.measure()) {
    throw Error(ErrorCode::incompatible_grids, "inputs must match the kernel's integration axes");
  }
}

}  // namespace detail

/// V(x) = int int L(x, y1, y2) f1(y1) f2(y2) dy1 dy2 by nested quadrature.
inline GridFunction bilinear_integral(const GridFunction& kernel, const GridFunction& f1, const GridFunction& f2) {
  detail::check_kernel_axes(kernel, f1, f2);
  const std::size_t n0 = kernel.axes()[0].n;
  const std::size_t n1 = kernel.axes()[1].n;
  const std::size_t n2 = kernel.axes()[2].n;
  const double w1 = kernel.axis_weight(1);
  const double w2 = kernel.axis_weight(2);
  std::vector<double> out(n0, 0.0);
  for (std::size_t x = 0; x < n0; ++x) {
    double s = 0.0;
    for (std::size_t i = 0; i < n1; ++i) {
      double inner = 0.0;
      for (std::size_t j = 0; j < n2; ++j) inner += kernel.values()[(x * n1 + i) * n2 + j] * f2.values()[j];
      s += f1.values()[i] * inner * w2;
    }
    out[x] = s * w1;
  }
  return GridFunction({kernel.axes()[0]}, kernel.measure(), false, std::move(out));
}

/// Mixed norm l[L](p, p1, p2): L^{p1'} over y1, then L^{p2'} over y2,
/// then L^p over x.
inline double mixed_norm_kernel(const GridFunction& kernel, double p, double p1, double p2) {
  if (kernel.dims() != 3) throw Error(ErrorCode::incompatible_grids, "kernel must be a 3-axis grid");
  for (double e : {p, p1, p2}) {
    if (!(e > 1.0)) throw Error(ErrorCode::exponent_out_of_range, "mixed norm exponents must exceed 1");
  }
  const double c1 = conjugate_exponent(p1);
  const double c2 = conjugate_exponent(p2);
  const std::size_t n0 = kernel.axes()[0].n;
  const std::size_t n1 = kernel.axes()[1].n;
  const std::size_t n2 = kernel.axes()[2].n;
  const double w0 = kernel.axis_weight(0);
  const double w1 = kernel.axis_weight(1);
  const double w2 = kernel.axis_weight(2);
  std::vector<double> col(n1);
  std::vector<double> row(n2);
  std::vector<double> outer(n0);
  for (std::size_t x = 0; x < n0; ++x) {
    for (std::size_t j = 0; j < n2; ++j) {
      for (std::size_t i = 0; i < n1; ++i) col[i] = kernel.values()[(x * n1 + i) * n2 + j];
      row[j] = detail::weighted_lp(col, c1, [w1](std::size_t) { return w1; });
    }
    outer[x] = detail::weighted_lp(row, c2, [w2](std::size_t) { return w2; });
  }
  return detail::weighted_lp(outer, p, [w0](std::size_t) { return w0; });
}

/// T(y) = max(mu{f > y}, mu{f < -y}) from the quadrature weights.
inline TailCurve empirical_tail(const GridFunction& f, std::span<const double> y_grid) {
  const double w = f.cell_weight();
  std::vector<double> pos(f.values().begin(), f.values().end());
  std::vector<double> neg;
  neg.reserve(pos.size());
  for (double v : pos) neg.push_back(-v);
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  auto above = [w](const std::vector<double>& s, double y) {
    const auto it = std::upper_bound(s.begin(), s.end(), y);
    return static_cast<double>(s.end() - it) * w;
  };
  std::vector<TailPoint> pts;
  pts.reserve(y_grid.size());
  for (double y : y_grid) pts.push_back({y, std::min(f.total_measure(), std::max(above(pos, y), above(neg, y)))});
  return TailCurve(std::move(pts), f.total_measure());
}

/// x -> f(lambda x) on the box scaled by 1/lambda.
inline GridFunction dilation(const GridFunction& f, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error(ErrorCode::invalid_parameter, "scale must be > 0");
  if (f.periodic() || f.measure() != Measure::lebesgue) {
    throw Error(ErrorCode::incompatible_grids, "dilation needs a non-periodic Lebesgue grid");
  }
  auto axes = f.axes();
  for (auto& a : axes) {
    a.lo /= lambda;
    a.hi /= lambda;
    if (!std::isfinite(a.lo) || !std::isfinite(a.hi) || !(a.hi > a.lo) || !(a.spacing() > 0.0)) {
      throw Error(ErrorCode::unrepresentable_scale, "rescaled box is not representable");
    }
  }
  return GridFunction(std::move(axes), f.measure(), false, std::vector<double>(f.values().begin(), f.values().end()));
}

struct VerifyRow {
  double p = 1.0;
  double empirical = 0.0;
  ExtendedReal kappa;
  double ratio = 0.0;
};

struct BoundCheck {
  double max_ratio = 0.0;
  double worst_p = 1.0;
  std::vector<VerifyRow> rows;
};

/// max_p norm_at(p) / (scale kappa(p)); C / inf = 0.
template <class NormAt>
BoundCheck verify_bound_with(NormAt&& norm_at, const PsiFunction& kappa, std::span<const double> p_grid,
                             double scale = 1.0) {
  BoundCheck out;
  if (p_grid.empty()) throw Error(ErrorCode::insufficient_grid, "empty exponent grid");
  out.worst_p = p_grid.front();
  for (double p : p_grid) {
    if (!kappa.domain().contains(p)) {
      throw Error(ErrorCode::domain_mismatch, "exponent " + std::to_string(p) + " lies outside the bound's domain");
    }
    VerifyRow row;
    row.p = p;
    row.empirical = norm_at(p);
    row.kappa = kappa(p);
    const ExtendedReal denom = scale * row.kappa;
    row.ratio = row.empirical / denom;
    if (row.ratio > out.max_ratio || out.rows.empty()) {
      out.max_ratio = row.ratio;
      out.worst_p = p;
    }
    out.rows.push_back(row);
  }
  return out;
}

inline BoundCheck verify_bound(const GridFunction& g, const PsiFunction& kappa, std::span<const double> p_grid) {
  return verify_bound_with([&](double p) { return lp_norm(g, p); }, kappa, p_grid);
}

inline BoundCheck verify_bound(const SequenceFunction& g, const PsiFunction& kappa, std::span<const double> p_grid) {
  return verify_bound_with([&](double p) { return lp_norm(g, p); }, kappa, p_grid);
}

}  // namespace gls
