#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gls/error.hpp"
#include "gls/interval.hpp"

namespace gls {

struct MomentEntry {
  double p = 1.0;
  double moment = 0.0;
};

/// Sampled p -> |f|_p values on a strictly increasing exponent grid.
class MomentTable {
 public:
  MomentTable() = default;

  explicit MomentTable(std::vector<MomentEntry> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw Error(ErrorCode::invalid_parameter, "moment table is empty");
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      if (!(e.p >= 1.0) || !std::isfinite(e.p)) {
        throw Error(ErrorCode::invalid_parameter, "moment table exponents must be finite and >= 1");
      }
      if (!(e.moment >= 0.0) || !std::isfinite(e.moment)) {
        throw Error(ErrorCode::invalid_parameter, "moment table values must be finite and >= 0");
      }
      if (i > 0 && !(e.p > entries_[i - 1].p)) {
        throw Error(ErrorCode::invalid_parameter, "moment table exponents must be strictly increasing");
      }
    }
  }

  [[nodiscard]] std::span<const MomentEntry> entries() const noexcept { return entries_; }
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
  [[nodiscard]] double min_p() const { return entries_.front().p; }
  [[nodiscard]] double max_p() const { return entries_.back().p; }

  /// Closed hull [min_p, max_p] of the table grid.
  [[nodiscard]] PInterval hull() const { return PInterval::closed(min_p(), max_p()); }

  [[nodiscard]] MomentTable scaled(double c) const {
    auto copy = entries_;
    for (auto& e : copy) e.moment *= c;
    return MomentTable(std::move(copy));
  }

  /// Interpolation linear in (p, ln moment); nullopt outside the hull.
  /// Falls back to linear interpolation of the moment when a bracketing
  /// entry is zero.
  [[nodiscard]] std::optional<double> interpolate(double p) const {
    if (entries_.empty() || p < min_p() || p > max_p()) return std::nullopt;
    auto it = std::lower_bound(entries_.begin(), entries_.end(), p,
                               [](const MomentEntry& e, double x) { return e.p < x; });
    if (it->p == p) return it->moment;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double t = (p - lo.p) / (hi.p - lo.p);
    if (lo.moment > 0.0 && hi.moment > 0.0) {
      return std::exp((1.0 - t) * std::log(lo.moment) + t * std::log(hi.moment));
    }
    return (1.0 - t) * lo.moment + t * hi.moment;
  }

  /// Largest relative concavity defect of p -> p ln |f|_p (which is convex on
  /// probability spaces). Measured data may be noisy, so callers treat a
  /// positive result as a warning.
  [[nodiscard]] double log_convexity_defect() const {
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < entries_.size(); ++i) {
      const auto& a = entries_[i - 1];
      const auto& b = entries_[i];
      const auto& c = entries_[i + 1];
      if (a.moment <= 0.0 || b.moment <= 0.0 || c.moment <= 0.0) continue;
      const double ha = a.p * std::log(a.moment);
      const double hb = b.p * std::log(b.moment);
      const double hc = c.p * std::log(c.moment);
      const double s1 = (hb - ha) / (b.p - a.p);
      const double s2 = (hc - hb) / (c.p - b.p);
      const double scale = std::max({1.0, std::abs(s1), std::abs(s2)});
      worst = std::max(worst, (s1 - s2) / scale);
    }
    return worst;
  }

 private:
  std::vector<MomentEntry> entries_;
};

inline constexpr const char* kMomentTableMagic = "glsmoments v1";

/// Parses the `glsmoments v1` text format (one `p<TAB>moment` pair per line).
inline MomentTable read_moment_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::parse_error, "missing glsmoments header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMomentTableMagic) throw Error(ErrorCode::parse_error, "bad moment table header: " + line);
  std::vector<MomentEntry> entries;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::parse_error, "line " + std::to_string(lineno) + ": expected p<TAB>moment");
    }
    MomentEntry e;
    std::istringstream ps(line.substr(0, tab));
    std::istringstream ms(line.substr(tab + 1));
    if (!(ps >> e.p) || !(ms >> e.moment) || !(ps >> std::ws).eof() || !(ms >> std::ws).eof()) {
      throw Error(ErrorCode::parse_error, "line " + std::to_string(lineno) + ": malformed number");
    }
    entries.push_back(e);
  }
  try {
    return MomentTable(std::move(entries));
  } catch (const Error& e) {
    throw Error(ErrorCode::parse_error, e.what());
  }
}

inline void write_moment_table(std::ostream& out, const MomentTable& table) {
  out << kMomentTableMagic << '\n';
  char buf[64];
  for (const auto& e : table.entries()) {
    std::snprintf(buf, sizeof buf, "%.17g\t%.17g\n", e.p, e.moment);
    out << buf;
  }
}

}  // namespace gls
