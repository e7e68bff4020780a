#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "gls/error.hpp"
#include "gls/extended.hpp"
#include "gls/interval.hpp"
#include "gls/layer_solution.hpp"
#include "gls/moment_table.hpp"

namespace gls {

namespace detail {
struct PsiNode;
}

namespace form {
struct Power;
struct RationalFactor;
struct Window;
struct Degenerate;
struct Natural;
struct Product;
struct Scaled;
struct LayerInfimum;
}  // namespace form

using PsiForm = std::variant<form::Power, form::RationalFactor, form::Window, form::Degenerate, form::Natural,
                             form::Product, form::Scaled, form::LayerInfimum>;

/// Generating function psi(p) of a Grand Lebesgue Space, together with the
/// exponent interval on which it is finite. Immutable value with shared
/// structure; evaluation is +inf off the domain.
class PsiFunction {
 public:
  [[nodiscard]] const PInterval& domain() const;
  [[nodiscard]] ExtendedReal operator()(double p) const;
  [[nodiscard]] std::string describe() const;

  /// Underlying tagged form (see gls::form).
  [[nodiscard]] const PsiForm& form() const;

  [[nodiscard]] bool is_degenerate() const { return domain().is_point(); }

 private:
  explicit PsiFunction(std::shared_ptr<const detail::PsiNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const detail::PsiNode> node_;

  template <class Form>
  friend PsiFunction make_node(PInterval domain, Form form);
};

namespace form {

/// beta * p^gamma
struct Power {
  double beta = 1.0;
  double gamma = 0.0;
};

/// beta * p^gamma / (p - 1)^delta
struct RationalFactor {
  double beta = 1.0;
  double gamma = 0.0;
  double delta = 0.0;
};

/// scale * (p - lower)^(-left_power) * (upper - p)^(-right_power) on (lower, upper)
struct Window {
  double scale = 1.0;
  double lower = 1.0;
  double upper = 2.0;
  double left_power = 0.0;
  double right_power = 0.0;
};

/// 1 at p = r, +inf elsewhere.
struct Degenerate {
  double r = 1.0;
};

/// psi(p) = |f|_p read from a moment table.
struct Natural {
  MomentTable table;
};

struct Product {
  PsiFunction first;
  PsiFunction second;
};

struct Scaled {
  double factor = 1.0;
  PsiFunction inner;
};

/// kappa(p) produced by a layer minimization.
struct LayerInfimum {
  std::shared_ptr<const KappaSource> source;
};

}  // namespace form

namespace detail {
struct PsiNode {
  PInterval domain;
  PsiForm form;
};
}  // namespace detail

template <class Form>
PsiFunction make_node(PInterval domain, Form form) {
  return PsiFunction(std::make_shared<const detail::PsiNode>(detail::PsiNode{domain, PsiForm(std::move(form))}));
}

inline const PInterval& PsiFunction::domain() const { return node_->domain; }
inline const PsiForm& PsiFunction::form() const { return node_->form; }

namespace detail {

inline PInterval narrow(const PInterval& natural, const std::optional<PInterval>& requested) {
  if (!requested) return natural;
  auto d = natural.intersect(*requested);
  if (!d) throw Error(ErrorCode::empty_domain, "requested interval misses the domain of finiteness");
  return *d;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace detail

inline PsiFunction make_power(double beta, double gamma, std::optional<PInterval> within = std::nullopt) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(ErrorCode::invalid_parameter, "power form needs beta > 0");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw Error(ErrorCode::invalid_parameter, "power form needs gamma >= 0");
  return make_node(detail::narrow(PInterval::from(1.0), within), form::Power{beta, gamma});
}

inline PsiFunction make_rational(double beta, double gamma, double delta,
                                 std::optional<PInterval> within = std::nullopt) {
  if (!(beta > 0.0)) throw Error(ErrorCode::invalid_parameter, "rational factor needs beta > 0");
  if (!(gamma >= 0.0) || !(delta >= 0.0)) {
    throw Error(ErrorCode::invalid_parameter, "rational factor needs gamma, delta >= 0");
  }
  const PInterval natural = delta > 0.0 ? PInterval::from(1.0, false) : PInterval::from(1.0);
  return make_node(detail::narrow(natural, within), form::RationalFactor{beta, gamma, delta});
}

inline PsiFunction make_window(double scale, double lower, double upper, double left_power, double right_power,
                               std::optional<PInterval> within = std::nullopt) {
  if (!(scale > 0.0)) throw Error(ErrorCode::invalid_parameter, "window needs C > 0");
  if (!(lower >= 1.0) || !(lower < upper) || !std::isfinite(upper)) {
    throw Error(ErrorCode::invalid_parameter, "window needs 1 <= a < b < inf");
  }
  if (!(left_power >= 0.0) || !(right_power >= 0.0)) {
    throw Error(ErrorCode::invalid_parameter, "window exponents must be >= 0");
  }
  // A zero exponent leaves the corresponding endpoint finite.
  const auto natural = PInterval::make(lower, upper, left_power == 0.0, right_power == 0.0);
  return make_node(detail::narrow(natural, within), form::Window{scale, lower, upper, left_power, right_power});
}

inline PsiFunction make_degenerate(double r) {
  if (!(r >= 1.0) || !std::isfinite(r)) throw Error(ErrorCode::invalid_parameter, "degenerate psi needs r >= 1");
  return make_node(PInterval::point(r), form::Degenerate{r});
}

inline PsiFunction make_natural(MomentTable table, std::optional<PInterval> within = std::nullopt) {
  if (table.empty()) throw Error(ErrorCode::invalid_parameter, "natural psi needs a nonempty moment table");
  for (const auto& e : table.entries()) {
    if (!(e.moment > 0.0)) throw Error(ErrorCode::invalid_parameter, "natural psi needs strictly positive moments");
  }
  const PInterval hull = table.size() == 1 ? PInterval::point(table.min_p()) : table.hull();
  return make_node(detail::narrow(hull, within), form::Natural{std::move(table)});
}

inline PsiFunction make_product(const PsiFunction& first, const PsiFunction& second) {
  auto d = first.domain().intersect(second.domain());
  if (!d) throw Error(ErrorCode::empty_domain, "product of generating functions with disjoint domains");
  return make_node(*d, form::Product{first, second});
}

inline PsiFunction make_scaled(double factor, const PsiFunction& inner) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw Error(ErrorCode::invalid_parameter, "scale must be > 0");
  return make_node(inner.domain(), form::Scaled{factor, inner});
}

inline PsiFunction make_layer_infimum(std::shared_ptr<const KappaSource> source) {
  if (!source) throw Error(ErrorCode::invalid_parameter, "null kappa source");
  auto d = source->domain();
  return make_node(d, form::LayerInfimum{std::move(source)});
}

/// Builds a generating function from a form descriptor, inferring the
/// maximal domain of finiteness, optionally narrowed by `within`.
inline PsiFunction make_psi(const PsiForm& spec, std::optional<PInterval> within = std::nullopt) {
  return std::visit(
      detail::Overloaded{
          [&](const form::Power& f) { return make_power(f.beta, f.gamma, within); },
          [&](const form::RationalFactor& f) { return make_rational(f.beta, f.gamma, f.delta, within); },
          [&](const form::Window& f) {
            return make_window(f.scale, f.lower, f.upper, f.left_power, f.right_power, within);
          },
          [&](const form::Degenerate& f) {
            auto psi = make_degenerate(f.r);
            detail::narrow(psi.domain(), within);
            return psi;
          },
          [&](const form::Natural& f) { return make_natural(f.table, within); },
          [&](const form::Product& f) {
            auto psi = make_product(f.first, f.second);
            return within ? make_node(detail::narrow(psi.domain(), within), f) : psi;
          },
          [&](const form::Scaled& f) {
            auto psi = make_scaled(f.factor, f.inner);
            return within ? make_node(detail::narrow(psi.domain(), within), f) : psi;
          },
          [&](const form::LayerInfimum& f) {
            auto psi = make_layer_infimum(f.source);
            return within ? make_node(detail::narrow(psi.domain(), within), f) : psi;
          },
      },
      spec);
}

inline ExtendedReal PsiFunction::operator()(double p) const {
  if (!(p >= 1.0) || !domain().contains(p)) return ExtendedReal::infinity();
  return std::visit(
      detail::Overloaded{
          [&](const form::Power& f) { return ExtendedReal(f.beta * std::pow(p, f.gamma)); },
          [&](const form::RationalFactor& f) {
            return ExtendedReal(f.beta * std::pow(p, f.gamma) / std::pow(p - 1.0, f.delta));
          },
          [&](const form::Window& f) {
            return ExtendedReal(f.scale * std::pow(p - f.lower, -f.left_power) * std::pow(f.upper - p, -f.right_power));
          },
          [&](const form::Degenerate&) { return ExtendedReal(1.0); },
          [&](const form::Natural& f) {
            auto m = f.table.interpolate(p);
            return m ? ExtendedReal(*m) : ExtendedReal::infinity();
          },
          [&](const form::Product& f) { return f.first(p) * f.second(p); },
          [&](const form::Scaled& f) { return f.factor * f.inner(p); },
          [&](const form::LayerInfimum& f) { return f.source->solve(p).kappa; },
      },
      node_->form);
}

inline std::string PsiFunction::describe() const {
  std::ostringstream os;
  os.precision(12);
  std::visit(detail::Overloaded{
                 [&](const form::Power& f) { os << "power(beta=" << f.beta << ", gamma=" << f.gamma << ")"; },
                 [&](const form::RationalFactor& f) {
                   os << "rational(beta=" << f.beta << ", gamma=" << f.gamma << ", delta=" << f.delta << ")";
                 },
                 [&](const form::Window& f) {
                   os << "window(C=" << f.scale << ", a=" << f.lower << ", b=" << f.upper << ", c=" << f.left_power
                      << ", s=" << f.right_power << ")";
                 },
                 [&](const form::Degenerate& f) { os << "degenerate(r=" << f.r << ")"; },
                 [&](const form::Natural& f) { os << "natural(" << f.table.size() << " moments)"; },
                 [&](const form::Product& f) { os << f.first.describe() << " * " << f.second.describe(); },
                 [&](const form::Scaled& f) { os << f.factor << " * (" << f.inner.describe() << ")"; },
                 [&](const form::LayerInfimum& f) { os << f.source->describe(); },
             },
             node_->form);
  os << " on " << domain().to_string();
  return os.str();
}

/// GLS norm sup_p moment(p) / psi(p), the supremum taken over the table grid
/// points inside psi's domain. A degenerate psi at r reads the (interpolated)
/// moment at r, recovering the classical L^r norm. C / inf = 0.
inline double gls_norm(const MomentTable& moments, const PsiFunction& psi) {
  if (moments.empty()) throw Error(ErrorCode::invalid_parameter, "empty moment table");
  const auto& dom = psi.domain();
  bool any = false;
  double sup = 0.0;
  auto take = [&](double p, double moment) {
    any = true;
    const ExtendedReal w = psi(p);
    sup = std::max(sup, moment / w);
  };
  if (dom.is_point()) {
    if (auto m = moments.interpolate(dom.lower)) take(dom.lower, *m);
  } else {
    for (const auto& e : moments.entries()) {
      if (dom.contains(e.p)) take(e.p, e.moment);
    }
  }
  if (!any) throw Error(ErrorCode::empty_intersection, "no tabulated exponent lies in the domain of psi");
  return sup;
}

struct ConvexityReport {
  bool convex = true;
  double max_violation = 0.0;  ///< largest negative second divided difference of h
};

/// Checks convexity of h(p) = p ln psi(p) on a sorted grid via second divided
/// differences. The flag tolerates violations up to `rel_tol` relative to the
/// local slope magnitude.
inline ConvexityReport check_h_convexity(const PsiFunction& psi, std::span<const double> grid, double rel_tol = 1e-9) {
  if (psi.domain().is_point() && !grid.empty() &&
      std::all_of(grid.begin(), grid.end(), [&](double p) { return p == psi.domain().lower; })) {
    return {};
  }
  if (grid.size() < 3) throw Error(ErrorCode::insufficient_grid, "convexity check needs at least 3 exponents");
  std::vector<double> h(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0 && !(grid[i] > grid[i - 1])) throw Error(ErrorCode::invalid_parameter, "grid must be strictly increasing");
    const ExtendedReal v = psi(grid[i]);
    if (v.is_infinite()) throw Error(ErrorCode::domain_mismatch, "grid point outside the domain of psi");
    h[i] = grid[i] * v.log();
  }
  ConvexityReport report;
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double s1 = (h[i] - h[i - 1]) / (grid[i] - grid[i - 1]);
    const double s2 = (h[i + 1] - h[i]) / (grid[i + 1] - grid[i]);
    const double second = 2.0 * (s2 - s1) / (grid[i + 1] - grid[i - 1]);
    if (second < 0.0) {
      report.max_violation = std::max(report.max_violation, -second);
      const double scale = std::max({1.0, std::abs(s1), std::abs(s2)});
      if ((s1 - s2) / scale > rel_tol) report.convex = false;
    }
  }
  return report;
}

}  // namespace gls
