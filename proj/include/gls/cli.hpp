#pragma once

// Config-driven bound / tail / verify pipelines. Needs nlohmann json.hpp on
// the include path.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gls/combinators.hpp"
#include "gls/corpus.hpp"
#include "gls/error.hpp"
#include "gls/fenchel.hpp"
#include "gls/grid_function.hpp"
#include "gls/oracle.hpp"
#include "gls/psi.hpp"

namespace gls::cli {

using json = nlohmann::json;

enum ExitCode : int { kSuccess = 0, kCertificateFailure = 1, kParseError = 2, kValidationError = 3 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PGrid {
  double min = 1.0;
  double max = 8.0;
  std::size_t count = 16;
  bool log = true;

  [[nodiscard]] std::vector<double> points() const {
    return log ? log_spaced_grid(min, max, count) : linear_grid(min, max, count);
  }
};

struct OperationSpec {
  std::string kind = "identity";
  int d = 1;
  int m = 2;
  int n = 1;
  std::vector<double> gammas;
  double c_env = 1.0;
  double l_bar = 1.0;
};

struct RunConfig {
  std::string command;
  std::uint64_t seed = 1;
  double tolerance = 1e-6;
  PGrid p_grid;
  OperationSpec operation;
  std::vector<json> psis;
  std::vector<json> inputs;
  double tail_norm = 1.0;
  std::vector<double> tail_y;
  double kappa_scale = 1.0;
  std::string output;
  std::filesystem::path base_dir;
};

struct RunResult {
  int exit_code = kSuccess;
  std::string report;
  std::string message;
};

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

inline const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string fmt(ExtendedReal v) { return v.is_infinite() ? "inf" : fmt(v.value()); }

inline std::vector<double> doubles(const json& j, const char* key) {
  if (!j.is_array()) throw ConfigError(std::string("field '") + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) throw ConfigError(std::string("field '") + key + "' must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace detail

/// Parse and validate a config document. Throws json::parse_error on
/// malformed text and ConfigError on schema violations.
inline RunConfig parse_config(const std::string& text, std::filesystem::path base_dir = {}) {
  const json j = json::parse(text);
  if (!j.is_object()) throw ConfigError("config must be an object");
  RunConfig c;
  c.base_dir = std::move(base_dir);
  c.command = detail::get_or<std::string>(j, "command", "");
  if (c.command != "bound" && c.command != "tail" && c.command != "verify") {
    throw ConfigError("command must be one of bound, tail, verify");
  }
  c.seed = detail::get_or<std::uint64_t>(j, "seed", 1);
  c.tolerance = detail::get_or<double>(j, "tolerance", 1e-6);
  c.kappa_scale = detail::get_or<double>(j, "kappa_scale", 1.0);
  c.output = detail::get_or<std::string>(j, "output", c.command + ".tsv");
  if (j.contains("p_grid")) {
    const auto& g = j.at("p_grid");
    c.p_grid.min = detail::get_or<double>(g, "min", 1.0);
    c.p_grid.max = detail::get_or<double>(g, "max", 8.0);
    c.p_grid.count = detail::get_or<std::size_t>(g, "count", 16);
    c.p_grid.log = detail::get_or<bool>(g, "log", true);
  }
  if (j.contains("operation")) {
    const auto& o = j.at("operation");
    c.operation.kind = detail::get_or<std::string>(o, "kind", "identity");
    c.operation.d = detail::get_or<int>(o, "d", 1);
    c.operation.m = detail::get_or<int>(o, "m", 2);
    c.operation.n = detail::get_or<int>(o, "n", 1);
    c.operation.c_env = detail::get_or<double>(o, "c_env", 1.0);
    c.operation.l_bar = detail::get_or<double>(o, "l_bar", 1.0);
    if (o.contains("gammas")) c.operation.gammas = detail::doubles(o.at("gammas"), "gammas");
  }
  if (j.contains("psis")) {
    if (!j.at("psis").is_array()) throw ConfigError("psis must be an array");
    for (const auto& p : j.at("psis")) c.psis.push_back(p);
  }
  if (j.contains("inputs")) {
    if (!j.at("inputs").is_array()) throw ConfigError("inputs must be an array");
    for (const auto& p : j.at("inputs")) c.inputs.push_back(p);
  }
  if (j.contains("tail")) {
    const auto& t = j.at("tail");
    c.tail_norm = detail::get_or<double>(t, "norm", 1.0);
    if (t.contains("y")) {
      const auto& y = t.at("y");
      if (y.is_object()) {
        PGrid g;
        g.min = detail::get_or<double>(y, "min", 1.0);
        g.max = detail::get_or<double>(y, "max", 4.0);
        g.count = detail::get_or<std::size_t>(y, "count", 16);
        g.log = detail::get_or<bool>(y, "log", false);
        c.tail_y = g.points();
      } else {
        c.tail_y = detail::doubles(y, "y");
      }
    }
  }

  if (!(c.p_grid.min >= 1.0) || !(c.p_grid.max >= c.p_grid.min) || c.p_grid.count < 2) {
    throw ConfigError("p_grid needs min >= 1, max >= min and count >= 2");
  }
  if (!(c.tolerance >= 0.0)) throw ConfigError("tolerance must be >= 0");
  if (!(c.kappa_scale > 0.0)) throw ConfigError("kappa_scale must be > 0");
  if (c.command == "tail") {
    if (c.psis.empty()) throw ConfigError("tail needs one psi");
    if (c.tail_y.empty()) throw ConfigError("tail needs levels in tail.y");
    if (!(c.tail_norm > 0.0)) throw ConfigError("tail.norm must be > 0");
  }
  if (c.command == "verify" && c.inputs.empty()) throw ConfigError("verify needs inputs");
  if (c.command != "tail" && c.operation.kind.empty()) throw ConfigError("operation.kind is required");
  return c;
}

namespace detail {

inline std::filesystem::path resolve(const RunConfig& c, const std::string& path) {
  std::filesystem::path p(path);
  return p.is_absolute() || c.base_dir.empty() ? p : c.base_dir / p;
}

inline std::vector<Axis> axes_of(const json& node, double lo, double hi, std::size_t n) {
  const auto dims = get_or<std::size_t>(node, "dims", 1);
  if (dims == 0) throw ConfigError("input dims must be >= 1");
  if (node.contains("box")) {
    const auto box = doubles(node.at("box"), "box");
    if (box.size() != 2) throw ConfigError("box must be [lo, hi]");
    lo = box[0];
    hi = box[1];
  }
  n = get_or<std::size_t>(node, "n", n);
  return cube_axes(dims, lo, hi, n);
}

inline GridFunction build_input(const RunConfig& c, const json& node, Rng& rng) {
  const std::string k = require(node, "kind").get<std::string>();
  const Measure measure = parse_measure(get_or<std::string>(node, "measure", "lebesgue"));
  if (k == "gaussian") {
    return gaussian_grid(get_or<double>(node, "sigma", 1.0), axes_of(node, -8.0, 8.0, 256), measure);
  }
  if (k == "indicator") {
    return indicator_grid(get_or<double>(node, "fraction", 0.5), axes_of(node, 0.0, 1.0, 256), rng,
                          parse_measure(get_or<std::string>(node, "measure", "uniprob")));
  }
  if (k == "power_profile") {
    return power_profile(get_or<double>(node, "a", 1.0), axes_of(node, -1.0, 1.0, 256), measure);
  }
  if (k == "trig_polynomial") {
    Rng local(get_or<std::uint64_t>(node, "seed", rng.engine()()));
    return trig_polynomial(local, get_or<std::size_t>(node, "degree", 3), get_or<std::size_t>(node, "dims", 1),
                           get_or<std::size_t>(node, "n", 64));
  }
  if (k == "file") {
    const auto path = resolve(c, require(node, "path").get<std::string>());
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::parse_error, "cannot open " + path.string());
    return read_grid_function(in);
  }
  throw ConfigError("unknown input kind '" + k + "'");
}

/// Exponent grid backing natural tables: the query grid plus a log grid to
/// `factor` times its top.
inline std::vector<double> natural_table_grid(std::span<const double> query, double factor = 4.0,
                                              std::size_t count = 256) {
  std::vector<double> g = log_spaced_grid(1.0, std::max(2.0, query.back() * factor), count);
  g.insert(g.end(), query.begin(), query.end());
  std::sort(g.begin(), g.end());
  std::vector<double> out;
  for (double p : g) {
    if (out.empty() || p > out.back() * (1.0 + 1e-12)) out.push_back(p);
  }
  return out;
}

inline PsiFunction build_psi(const RunConfig& c, const json& node, const std::optional<MomentTable>& natural) {
  const std::string k = require(node, "kind").get<std::string>();
  if (k == "power") return make_power(get_or<double>(node, "beta", 1.0), get_or<double>(node, "gamma", 1.0));
  if (k == "rational") {
    return make_rational(get_or<double>(node, "beta", 1.0), get_or<double>(node, "gamma", 0.0),
                         get_or<double>(node, "delta", 0.0));
  }
  if (k == "window") {
    return make_window(get_or<double>(node, "scale", 1.0), require(node, "a").get<double>(),
                       require(node, "b").get<double>(), get_or<double>(node, "c", 1.0),
                       get_or<double>(node, "s", 1.0));
  }
  if (k == "degenerate") return make_degenerate(require(node, "r").get<double>());
  if (k == "natural") {
    if (!natural) throw ConfigError("natural psi needs a matching input");
    return make_natural(*natural);
  }
  if (k == "file") {
    const auto path = resolve(c, require(node, "path").get<std::string>());
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::parse_error, "cannot open " + path.string());
    return make_natural(read_moment_table(in));
  }
  throw ConfigError("unknown psi kind '" + k + "'");
}

/// Closed-form power exponent of a psi node, if it is power-type.
inline std::optional<std::pair<double, double>> power_params(const json& node) {
  if (get_or<std::string>(node, "kind", "") != "power") return std::nullopt;
  return std::pair{get_or<double>(node, "beta", 1.0), get_or<double>(node, "gamma", 1.0)};
}

struct Combined {
  PsiFunction kappa;
  std::function<std::optional<double>(double)> envelope;
};

inline Combined combine(const RunConfig& c, const std::vector<PsiFunction>& psis) {
  const auto& op = c.operation;
  auto need = [&](std::size_t k) {
    if (psis.size() < k) throw ConfigError("operation '" + op.kind + "' needs " + std::to_string(k) + " psis");
  };
  auto none = [](double) -> std::optional<double> { return std::nullopt; };
  auto gamma = [&](std::size_t i) {
    if (op.gammas.size() <= i) throw ConfigError("operation '" + op.kind + "' needs gammas");
    return op.gammas[i];
  };
  // Power-input closed forms, when both specs are power-type.
  std::optional<std::pair<double, double>> pw1;
  std::optional<std::pair<double, double>> pw2;
  if (c.psis.size() >= 2) {
    pw1 = power_params(c.psis[0]);
    pw2 = power_params(c.psis[1]);
  }
  auto split_envelope = [&]() -> std::function<std::optional<double>(double)> {
    if (!pw1 || !pw2) return none;
    const double b = pw1->first * pw2->first;
    const double g1 = pw1->second;
    const double g2 = pw2->second;
    if (!(g1 > 0.0) || !(g2 > 0.0)) return none;
    return [=](double p) -> std::optional<double> { return b * conjugate_split_min(g1, g2, p).value; };
  };

  if (op.kind == "identity") {
    need(1);
    return {psis[0], none};
  }
  if (op.kind == "product") {
    need(2);
    return {combine_product(psis[0], psis[1]), split_envelope()};
  }
  if (op.kind == "tensor") {
    need(2);
    return {combine_tensor(psis[0], psis[1]), none};
  }
  if (op.kind == "convolution") {
    need(2);
    return {combine_convolution(psis[0], psis[1], op.n), split_envelope()};
  }
  if (op.kind == "infimal_convolution") {
    need(1);
    auto r = combine_infimal_convolution(psis[0], op.d, op.m);
    const PsiFunction base = psis[0];
    const double relaxed = r.relaxed_constant;
    return {r.kappa, [base, relaxed](double p) -> std::optional<double> {
              const auto v = base(p);
              if (v.is_infinite()) return std::nullopt;
              return relaxed * v.value();
            }};
  }
  if (op.kind == "maximal" || op.kind == "hausdorff") {
    const double g = gamma(0);
    auto r = op.kind == "maximal" ? combine_maximal(g, op.d, op.c_env) : combine_hausdorff(g, op.m, op.c_env);
    auto env = r.envelope;
    return {r.kappa, [env](double p) -> std::optional<double> { return env(p); }};
  }
  if (op.kind == "toeplitz") {
    const double g1 = gamma(0);
    const double g2 = gamma(1);
    return {combine_toeplitz(g1, g2), none};
  }
  if (op.kind == "bilinear_bounded") {
    need(2);
    return {combine_bilinear_bounded(psis[0], psis[1], op.l_bar), none};
  }
  throw ConfigError("unknown operation kind '" + op.kind + "'");
}

inline std::string join_point(const std::vector<double>& q) {
  if (q.empty()) return "-";
  std::string s;
  for (std::size_t i = 0; i < q.size(); ++i) s += (i ? "," : "") + fmt(q[i]);
  return s;
}

inline RunResult run_bound(const RunConfig& c) {
  Rng rng(c.seed);
  const auto grid = c.p_grid.points();
  std::vector<PsiFunction> psis;
  for (std::size_t i = 0; i < c.psis.size(); ++i) {
    std::optional<MomentTable> table;
    if (get_or<std::string>(c.psis[i], "kind", "") == "natural") {
      if (i >= c.inputs.size()) throw ConfigError("natural psi needs a matching input");
      table = moments_table(build_input(c, c.inputs[i], rng), natural_table_grid(grid));
    }
    psis.push_back(build_psi(c, c.psis[i], table));
  }
  const auto combined = combine(c, psis);
  std::ostringstream out;
  out << "p\tkappa\targmin\tenvelope\n";
  for (double p : grid) {
    const ExtendedReal k = combined.kappa(p);
    std::vector<double> argmin;
    if (auto sol = layer_solution(combined.kappa, p)) argmin = sol->argmin_q;
    const auto env = combined.envelope(p);
    out << fmt(p) << '\t' << fmt(k) << '\t' << join_point(argmin) << '\t' << (env ? fmt(*env) : "-") << '\n';
  }
  return {kSuccess, out.str(), ""};
}

inline RunResult run_tail(const RunConfig& c) {
  const PsiFunction psi = build_psi(c, c.psis[0], std::nullopt);
  const auto pw = power_params(c.psis[0]);
  const bool compare = c.operation.gammas.size() >= 2;
  const double g1 = compare ? c.operation.gammas[0] : 0.0;
  const double g2 = compare ? c.operation.gammas[1] : 0.0;
  if (compare && (!(g1 > 0.0) || !(g2 > 0.0))) throw ConfigError("gammas must be > 0");
  std::ostringstream out;
  out << "y\tbound\tclosed_form";
  if (compare) out << "\tproduct_harmonic\tproduct_sum";
  out << '\n';
  for (double y : c.tail_y) {
    out << fmt(y) << '\t' << fmt(tail_bound(psi, c.tail_norm, y)) << '\t';
    if (pw && pw->second > 0.0) {
      // beta rescales the norm: beta p^gamma membership with norm K is p^gamma with norm beta K.
      out << fmt(power_tail_closed_form(pw->second, pw->first * c.tail_norm, y));
    } else {
      out << '-';
    }
    if (compare) {
      const double u = y / c.tail_norm;
      out << '\t' << fmt(std::exp(-std::pow(u, g1 * g2 / (g1 + g2)))) << '\t'
          << fmt(std::exp(-std::pow(u, 1.0 / (g1 + g2))));
    }
    out << '\n';
  }
  return {kSuccess, out.str(), ""};
}

inline RunResult run_verify(const RunConfig& c) {
  Rng rng(c.seed);
  const auto grid = c.p_grid.points();
  const auto table_grid = natural_table_grid(grid);
  std::vector<GridFunction> inputs;
  for (const auto& node : c.inputs) inputs.push_back(build_input(c, node, rng));
  const auto& op = c.operation;
  auto need = [&](std::size_t k) {
    if (inputs.size() < k) throw ConfigError("operation '" + op.kind + "' needs " + std::to_string(k) + " inputs");
    if (c.psis.size() < std::min<std::size_t>(k, 1)) throw ConfigError("operation needs psis");
  };
  auto psi_for = [&](std::size_t i, const MomentTable& table) {
    const json& node = c.psis.size() > i ? c.psis[i] : c.psis.back();
    return build_psi(c, node, table);
  };

  std::function<double(double)> norm_at;
  std::optional<PsiFunction> kappa;
  double scale = 1.0;
  std::vector<MomentTable> tables;
  std::vector<PsiFunction> psis;
  auto load = [&](std::size_t k) {
    for (std::size_t i = 0; i < k; ++i) {
      tables.push_back(moments_table(inputs[i], table_grid));
      psis.push_back(psi_for(i, tables.back()));
    }
  };
  std::optional<GridFunction> g;
  std::optional<InfimalConvolutionResult> inf;

  if (op.kind == "identity") {
    need(1);
    load(1);
    g = inputs[0];
    kappa = psis[0];
    scale = gls_norm(tables[0], psis[0]);
  } else if (op.kind == "product") {
    need(2);
    load(2);
    g = pointwise_product(inputs[0], inputs[1]);
    kappa = combine_product(psis[0], psis[1]);
    scale = gls_norm(tables[0], psis[0]) * gls_norm(tables[1], psis[1]);
  } else if (op.kind == "tensor") {
    need(2);
    load(2);
    g = tensor_product(inputs[0], inputs[1]);
    kappa = combine_tensor(psis[0], psis[1]);
    scale = gls_norm(tables[0], psis[0]) * gls_norm(tables[1], psis[1]);
  } else if (op.kind == "convolution") {
    need(2);
    load(2);
    g = periodic_convolution(inputs[0], inputs[1]);
    kappa = combine_convolution(psis[0], psis[1], static_cast<int>(inputs[0].dims()));
    scale = gls_norm(tables[0], psis[0]) * gls_norm(tables[1], psis[1]);
  } else if (op.kind == "infimal_convolution") {
    need(2);
    tables.push_back(moments_table(inputs[0], table_grid));
    tables.push_back(moments_table(inputs[1], table_grid));
    // One psi for both inputs; a natural psi uses the larger moment.
    std::vector<MomentEntry> joint;
    for (std::size_t i = 0; i < tables[0].size(); ++i) {
      joint.push_back({tables[0].entries()[i].p,
                       std::max(tables[0].entries()[i].moment, tables[1].entries()[i].moment)});
    }
    const PsiFunction psi = build_psi(c, c.psis[0], MomentTable(std::move(joint)));
    inf = infimal_convolution(inputs[0], inputs[1]);
    kappa = combine_infimal_convolution(psi, static_cast<int>(inputs[0].dims()), 2).kappa;
    scale = gls_norm(tables[0], psi) + gls_norm(tables[1], psi);
  } else {
    throw ConfigError("verify does not support operation '" + op.kind + "'");
  }
  if (inf) {
    norm_at = [&](double p) { return lp_norm(inf->g, p, inf->window); };
  } else {
    norm_at = [&](double p) { return lp_norm(*g, p); };
  }
  const auto check = verify_bound_with(norm_at, *kappa, grid, scale * c.kappa_scale);
  std::ostringstream out;
  out << "p\tempirical\tkappa\tratio\n";
  for (const auto& r : check.rows) {
    out << fmt(r.p) << '\t' << fmt(r.empirical) << '\t' << fmt(c.kappa_scale * scale * r.kappa) << '\t'
        << fmt(r.ratio) << '\n';
  }
  const bool pass = check.max_ratio <= 1.0 + c.tolerance;
  out << (pass ? "PASS" : "FAIL") << "\tmax_ratio=" << fmt(check.max_ratio) << "\tworst_p=" << fmt(check.worst_p)
      << '\n';
  RunResult res{pass ? kSuccess : kCertificateFailure, out.str(), ""};
  if (!pass) res.message = "certificate failed: max ratio " + fmt(check.max_ratio) + " at p = " + fmt(check.worst_p);
  return res;
}

}  // namespace detail

/// Run a parsed config; library errors map to the validation exit code.
inline RunResult run(const RunConfig& c) {
  try {
    if (c.command == "bound") return detail::run_bound(c);
    if (c.command == "tail") return detail::run_tail(c);
    return detail::run_verify(c);
  } catch (const ConfigError& e) {
    return {kValidationError, "", e.what()};
  } catch (const json::exception& e) {
    return {kValidationError, "", e.what()};
  } catch (const Error& e) {
    return {e.code() == ErrorCode::parse_error ? kParseError : kValidationError, "",
            std::string(to_string(e.code())) + ": " + e.what()};
  }
}

/// Parse, run, and write the report to out_dir / config.output.
inline RunResult run_file(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                          std::optional<std::uint64_t> seed = std::nullopt,
                          std::optional<double> tolerance = std::nullopt) {
  std::ifstream in(config_path);
  if (!in) return {kParseError, "", "cannot open config " + config_path.string()};
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig c;
  try {
    c = parse_config(buf.str(), config_path.parent_path());
  } catch (const json::parse_error& e) {
    return {kParseError, "", std::string("config parse error: ") + e.what()};
  } catch (const ConfigError& e) {
    return {kValidationError, "", e.what()};
  } catch (const json::exception& e) {
    return {kValidationError, "", e.what()};
  }
  if (seed) c.seed = *seed;
  if (tolerance) c.tolerance = *tolerance;
  RunResult r = run(c);
  if (r.report.empty()) return r;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const auto path = out_dir / c.output;
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << r.report)) return {kValidationError, r.report, "cannot write " + path.string()};
  return r;
}

}  // namespace gls::cli
