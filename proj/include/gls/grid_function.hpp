#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gls/error.hpp"
#include "gls/moment_table.hpp"

namespace gls {

enum class Measure { lebesgue, uniprob, counting };

inline std::string to_string(Measure m) {
  switch (m) {
    case Measure::lebesgue: return "lebesgue";
    case Measure::uniprob: return "uniprob";
    case Measure::counting: return "counting";
  }
  return "?";
}

inline Measure parse_measure(const std::string& s) {
  if (s == "lebesgue") return Measure::lebesgue;
  if (s == "uniprob") return Measure::uniprob;
  if (s == "counting") return Measure::counting;
  throw Error(ErrorCode::parse_error, "unknown measure '" + s + "'");
}

/// Cell-count cap for the quadratic scans; GLS_MAX_CELLS overrides 2^22.
inline std::uint64_t max_cells() {
  if (const char* env = std::getenv("GLS_MAX_CELLS")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return std::uint64_t{1} << 22;
}

/// One axis of a uniform midpoint grid.
struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t n = 1;

  [[nodiscard]] double spacing() const { return (hi - lo) / static_cast<double>(n); }
  [[nodiscard]] double center(std::size_t i) const { return lo + (static_cast<double>(i) + 0.5) * spacing(); }
  bool operator==(const Axis&) const = default;
};

/// Samples of a function on a box grid, row-major, with a product measure.
class GridFunction {
 public:
  GridFunction() = default;

  GridFunction(std::vector<Axis> axes, Measure measure, bool periodic, std::vector<double> values)
      : axes_(std::move(axes)), measure_(measure), periodic_(periodic), values_(std::move(values)) {
    if (axes_.empty()) throw Error(ErrorCode::invalid_parameter, "grid needs at least one dimension");
    std::size_t total = 1;
    for (const auto& a : axes_) {
      if (a.n == 0 || !std::isfinite(a.lo) || !std::isfinite(a.hi) || !(a.hi > a.lo)) {
        throw Error(ErrorCode::invalid_parameter, "grid axis needs lo < hi and n >= 1");
      }
      total *= a.n;
    }
    if (values_.size() != total) throw Error(ErrorCode::invalid_parameter, "value count does not match grid shape");
    for (double v : values_) {
      if (!std::isfinite(v)) throw Error(ErrorCode::invalid_parameter, "grid values must be finite");
    }
  }

  /// Sample fn at the cell centers.
  static GridFunction sample(std::vector<Axis> axes, Measure measure, bool periodic,
                             const std::function<double(std::span<const double>)>& fn) {
    std::size_t total = 1;
    for (const auto& a : axes) total *= a.n;
    std::vector<double> values(total);
    std::vector<double> x(axes.size());
    std::vector<std::size_t> idx(axes.size(), 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
      for (std::size_t k = 0; k < axes.size(); ++k) x[k] = axes[k].center(idx[k]);
      values[flat] = fn(x);
      for (std::size_t k = axes.size(); k-- > 0;) {
        if (++idx[k] < axes[k].n) break;
        idx[k] = 0;
      }
    }
    return GridFunction(std::move(axes), measure, periodic, std::move(values));
  }

  [[nodiscard]] std::size_t dims() const noexcept { return axes_.size(); }
  [[nodiscard]] const std::vector<Axis>& axes() const noexcept { return axes_; }
  [[nodiscard]] Measure measure() const noexcept { return measure_; }
  [[nodiscard]] bool periodic() const noexcept { return periodic_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::vector<double>& mutable_values() noexcept { return values_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

  /// Quadrature weight of one axis cell.
  [[nodiscard]] double axis_weight(std::size_t k) const {
    switch (measure_) {
      case Measure::lebesgue: return axes_[k].spacing();
      case Measure::uniprob: return 1.0 / static_cast<double>(axes_[k].n);
      case Measure::counting: return 1.0;
    }
    return 1.0;
  }

  /// Weight of every cell (uniform grid).
  [[nodiscard]] double cell_weight() const {
    if (measure_ == Measure::uniprob) return 1.0 / static_cast<double>(values_.size());
    double w = 1.0;
    for (std::size_t k = 0; k < axes_.size(); ++k) w *= axis_weight(k);
    return w;
  }

  [[nodiscard]] double total_measure() const { return cell_weight() * static_cast<double>(values_.size()); }

  [[nodiscard]] std::vector<std::size_t> strides() const {
    std::vector<std::size_t> s(axes_.size(), 1);
    for (std::size_t k = axes_.size(); k-- > 1;) s[k - 1] = s[k] * axes_[k].n;
    return s;
  }

  [[nodiscard]] bool same_shape(const GridFunction& other) const {
    return axes_ == other.axes_ && measure_ == other.measure_ && periodic_ == other.periodic_;
  }

  [[nodiscard]] GridFunction scaled(double c) const {
    auto v = values_;
    for (auto& x : v) x *= c;
    return GridFunction(axes_, measure_, periodic_, std::move(v));
  }

 private:
  std::vector<Axis> axes_;
  Measure measure_ = Measure::lebesgue;
  bool periodic_ = false;
  std::vector<double> values_;
};

/// Positive rational n/k in lowest terms.
struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 1;

  static Rational make(std::int64_t n, std::int64_t d) {
    if (n <= 0 || d <= 0) throw Error(ErrorCode::invalid_parameter, "sequence indices must be positive");
    const std::int64_t g = std::gcd(n, d);
    return {n / g, d / g};
  }
  [[nodiscard]] bool is_integer() const { return den == 1; }
  auto operator<=>(const Rational& o) const { return static_cast<__int128>(num) * o.den <=> static_cast<__int128>(o.num) * den; }
  bool operator==(const Rational& o) const = default;
};

/// Finitely supported function on the positive rationals under counting measure.
class SequenceFunction {
 public:
  using Map = std::map<Rational, double>;

  SequenceFunction() = default;
  explicit SequenceFunction(Map support) : support_(std::move(support)) {
    for (const auto& [k, v] : support_) {
      if (k.num <= 0 || k.den <= 0) throw Error(ErrorCode::invalid_parameter, "sequence indices must be positive");
      if (!std::isfinite(v)) throw Error(ErrorCode::invalid_parameter, "sequence values must be finite");
    }
  }

  [[nodiscard]] const Map& support() const noexcept { return support_; }
  [[nodiscard]] double at(Rational r) const {
    auto it = support_.find(r);
    return it == support_.end() ? 0.0 : it->second;
  }
  void set(Rational r, double v) { support_[r] = v; }

 private:
  Map support_;
};

namespace detail {

/// (sum w |v|^p)^{1/p}, scaled by max|v| against overflow; p = inf gives max|v|.
template <class WeightFn>
double weighted_lp(std::span<const double> v, double p, WeightFn weight, std::span<const char> mask = {}) {
  if (!(p > 0.0)) throw Error(ErrorCode::exponent_out_of_range, "norm exponent must be > 0");
  double m = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    m = std::max(m, std::abs(v[i]));
  }
  if (std::isinf(p) || m == 0.0) return m;
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    const double a = std::abs(v[i]) / m;
    if (a > 0.0) s += weight(i) * std::pow(a, p);
  }
  return m * std::pow(s, 1.0 / p);
}

}  // namespace detail

/// Midpoint-rule L^p norm; an optional mask restricts the cells.
inline double lp_norm(const GridFunction& f, double p, std::span<const char> mask = {}) {
  if (!mask.empty() && mask.size() != f.size()) throw Error(ErrorCode::incompatible_grids, "mask size mismatch");
  const double w = f.cell_weight();
  return detail::weighted_lp(f.values(), p, [w](std::size_t) { return w; }, mask);
}

inline double lp_norm(const SequenceFunction& f, double p) {
  std::vector<double> v;
  v.reserve(f.support().size());
  for (const auto& kv : f.support()) v.push_back(kv.second);
  return detail::weighted_lp(v, p, [](std::size_t) { return 1.0; });
}

inline MomentTable moments_table(const GridFunction& f, std::span<const double> p_grid,
                                 std::span<const char> mask = {}) {
  std::vector<MomentEntry> e;
  e.reserve(p_grid.size());
  for (double p : p_grid) e.push_back({p, lp_norm(f, p, mask)});
  return MomentTable(std::move(e));
}

inline MomentTable moments_table(const SequenceFunction& f, std::span<const double> p_grid) {
  std::vector<MomentEntry> e;
  e.reserve(p_grid.size());
  for (double p : p_grid) e.push_back({p, lp_norm(f, p)});
  return MomentTable(std::move(e));
}

inline constexpr const char* kGridMagic = "glsgrid v1";
inline constexpr const char* kSequenceMagic = "glsseq v1";

inline GridFunction read_grid_function(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kGridMagic) throw Error(ErrorCode::parse_error, "missing glsgrid header");
  if (!std::getline(in, line)) throw Error(ErrorCode::parse_error, "missing grid description line");
  std::istringstream head(line);
  std::string kw_dims, kw_periodic, kw_measure, measure;
  std::size_t d = 0;
  int periodic = 0;
  if (!(head >> kw_dims >> d >> kw_periodic >> periodic >> kw_measure >> measure) || kw_dims != "dims" ||
      kw_periodic != "periodic" || kw_measure != "measure" || d == 0 || (periodic != 0 && periodic != 1)) {
    throw Error(ErrorCode::parse_error, "malformed grid description line");
  }
  if (!std::getline(in, line)) throw Error(ErrorCode::parse_error, "missing axis line");
  std::istringstream ax(line);
  std::vector<Axis> axes(d);
  std::size_t total = 1;
  for (auto& a : axes) {
    if (!(ax >> a.lo >> a.hi >> a.n)) throw Error(ErrorCode::parse_error, "malformed axis triple");
    total *= a.n;
  }
  std::vector<double> values;
  values.reserve(total);
  std::string tok;
  while (in >> tok) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw Error(ErrorCode::parse_error, "bad grid value '" + tok + "'");
    values.push_back(v);
  }
  try {
    return GridFunction(std::move(axes), parse_measure(measure), periodic == 1, std::move(values));
  } catch (const Error& e) {
    throw Error(ErrorCode::parse_error, e.what());
  }
}

inline void write_grid_function(std::ostream& out, const GridFunction& f) {
  char buf[64];
  out << kGridMagic << '\n'
      << "dims " << f.dims() << " periodic " << (f.periodic() ? 1 : 0) << " measure " << to_string(f.measure())
      << '\n';
  for (std::size_t k = 0; k < f.dims(); ++k) {
    const auto& a = f.axes()[k];
    std::snprintf(buf, sizeof buf, "%.17g %.17g %zu", a.lo, a.hi, a.n);
    out << (k ? " " : "") << buf;
  }
  out << '\n';
  const std::size_t row = f.axes().back().n;
  for (std::size_t i = 0; i < f.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", f.values()[i]);
    out << buf << ((i + 1) % row == 0 ? '\n' : ' ');
  }
}

inline SequenceFunction read_sequence_function(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSequenceMagic) throw Error(ErrorCode::parse_error, "missing glsseq header");
  SequenceFunction::Map m;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string key;
    double v = 0.0;
    if (!(ls >> key >> v)) throw Error(ErrorCode::parse_error, "malformed sequence line '" + line + "'");
    std::int64_t num = 0;
    std::int64_t den = 1;
    const auto slash = key.find('/');
    try {
      std::size_t used = 0;
      num = std::stoll(key.substr(0, slash), &used);
      if (used != (slash == std::string::npos ? key.size() : slash)) throw std::invalid_argument(key);
      if (slash != std::string::npos) {
        den = std::stoll(key.substr(slash + 1), &used);
        if (used != key.size() - slash - 1) throw std::invalid_argument(key);
      }
      m[Rational::make(num, den)] = v;
    } catch (const Error&) {
      throw Error(ErrorCode::parse_error, "invalid sequence index '" + key + "'");
    } catch (const std::exception&) {
      throw Error(ErrorCode::parse_error, "invalid sequence index '" + key + "'");
    }
  }
  return SequenceFunction(std::move(m));
}

inline void write_sequence_function(std::ostream& out, const SequenceFunction& f) {
  char buf[64];
  out << kSequenceMagic << '\n';
  for (const auto& [k, v] : f.support()) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    if (k.is_integer()) {
      out << k.num << '\t' << buf << '\n';
    } else {
      out << k.num << '/' << k.den << '\t' << buf << '\n';
    }
  }
}

}  // namespace gls
