// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "gls/cli.hpp"
#include "gls/gls.hpp"

namespace fs = std::filesystem;
using namespace gls;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Minimizes g1 ln a + g2 ln b over 1/a + 1/b = 1/p by a grid in s = p/a
// followed by ternary refinement of the best bracket.
double brute_split_log(double g1, double g2, double p) {
  auto obj = [&](double s) { return g1 * std::log(p / s) + g2 * std::log(p / (1.0 - s)); };
  const int n = 100000;
  int best = 1;
  double best_v = obj(1.0 / n);
  for (int i = 2; i < n; ++i) {
    const double v = obj(static_cast<double>(i) / n);
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  double lo = static_cast<double>(best - 1) / n;
  double hi = static_cast<double>(best + 1) / n;
  if (lo <= 0.0) lo = 0.5 / n;
  if (hi >= 1.0) hi = 1.0 - 0.5 / n;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (obj(m1) < obj(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return obj(0.5 * (lo + hi));
}

Outcome criterion1() {
  double worst = 0.0;
  const auto gammas = log_spaced_grid(0.1, 10.0, 10);
  for (double g1 : gammas) {
    for (double g2 : gammas) {
      worst = std::max(worst, rel_err(holder_split_min(g1, g2).value, std::exp(brute_split_log(g1, g2, 1.0))));
      for (double p : {1.0, 2.0, 8.0}) {
        worst = std::max(worst, rel_err(conjugate_split_min(g1, g2, p).value, std::exp(brute_split_log(g1, g2, p))));
      }
    }
  }
  return {worst <= 1e-6, fmt("max relative error %.3g over 400 cases", worst)};
}

Outcome criterion2() {
  double worst_conj = 0.0;
  double worst_tail = 0.0;
  for (double g : {0.25, 0.5, 1.0, 2.0}) {
    const auto psi = make_power(1.0, g);
    for (double s : linear_grid(1.05, 4.0, 50)) {
      const double v = g * s;
      const double expected = g * std::exp(v / g - 1.0);
      worst_conj = std::max(worst_conj, rel_err(fenchel_conjugate(psi, v).value, expected));
      const double k = 1.3;
      const double y = k * std::exp(v);
      worst_tail = std::max(worst_tail, rel_err(tail_bound(psi, k, y), power_tail_closed_form(g, k, y)));
    }
  }
  return {worst_conj <= 1e-6 && worst_tail <= 1e-6,
          fmt("conjugate max rel err %.3g, tail max rel err %.3g", worst_conj, worst_tail)};
}

Outcome criterion3() {
  Rng rng(3);
  double worst = 0.0;
  const auto grid = log_spaced_grid(1.0, 40.0, 64);
  for (int i = 0; i < 20; ++i) {
    const std::size_t d = 1 + rng.index(2);
    const auto f = random_grid(rng, cube_axes(d, -1.0, 1.0, d == 1 ? 200 : 24),
                               i % 2 ? Measure::uniprob : Measure::lebesgue, -2.0, 3.0);
    const auto t = moments_table(f, grid);
    worst = std::max(worst, std::abs(gls_norm(t, make_natural(t)) - 1.0));
  }
  return {worst <= 1e-12, fmt("max |norm - 1| = %.3g over 20 functions", worst)};
}

Outcome criterion4() {
  Rng rng(4);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const auto f = random_grid(rng, {Axis{0.0, 1.0, 17 + rng.index(20)}}, Measure::uniprob, -1.0, 1.0);
    const auto g = random_grid(rng, {Axis{-1.0, 2.0, 5 + rng.index(10)}, Axis{0.0, 1.0, 9}}, Measure::uniprob, 0.0,
                               2.0);
    const auto t = tensor_product(f, g);
    for (double p : {0.5, 1.0, 2.0, 4.0}) worst = std::max(worst, rel_err(lp_norm(t, p), lp_norm(f, p) * lp_norm(g, p)));
  }
  return {worst <= 1e-12, fmt("max relative error %.3g", worst)};
}

Outcome criterion5() {
  Rng rng(5);
  const auto inv = linear_grid(0.5, 1.0, 6);
  double worst = 0.0;
  double max_g = 0.0;
  std::size_t checks = 0;
  for (int i = 0; i < 20; ++i) {
    const std::size_t d = 1 + static_cast<std::size_t>(i % 2);
    const auto f = trig_polynomial(rng, 3, d, d == 1 ? 64 : 16);
    const auto g = trig_polynomial(rng, 2, d, d == 1 ? 64 : 16);
    const auto c = periodic_convolution(f, g);
    for (double a : inv) {
      for (double b : inv) {
        if (a + b < 1.0) continue;
        const auto bc = beckner_constant(static_cast<int>(d), 1.0 / a, 1.0 / b);
        max_g = std::max(max_g, bc.g);
        worst = std::max(worst, lp_norm(c, bc.r) / (bc.g * lp_norm(f, 1.0 / a) * lp_norm(g, 1.0 / b)));
        ++checks;
      }
    }
  }
  return {worst <= 1.0 + 1e-6 && max_g <= 1.0,
          fmt("max ratio %.6g, max G %.6g, %g checks", worst, max_g, static_cast<double>(checks))};
}

Outcome criterion6() {
  const auto start = std::chrono::steady_clock::now();
  const auto f = GridFunction::sample({Axis{-1.0, 1.0, 2048}}, Measure::lebesgue, false,
                                      [](std::span<const double> x) { return x[0] * x[0]; });
  const auto r = infimal_convolution(f, f);
  double lo = 1e300;
  double hi = 0.0;
  std::string rows;
  for (double p : {1.0, 2.0, 4.0}) {
    const double ratio = lp_norm(r.g, p, r.window) / (std::pow(2.0, 1.0 / p) * 2.0 * lp_norm(f, p));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    rows += fmt(" p=%g:%.6f", p, ratio);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {lo >= 0.99 && hi <= 1.0 + 1e-3 && secs < 60.0, "ratios" + rows + fmt(", %.2f s", secs)};
}

Outcome criterion7() {
  // The literal relation 1/p = 1 - 1/p1 - 1/p2.
  const std::vector<std::array<double, 3>> triples{
      {3.0, 3.0, 3.0}, {4.0, 2.0, 4.0}, {2.0, 4.0, 4.0}, {2.0, 3.0, 6.0}, {6.0, 2.0, 3.0}};
  Rng rng(7);
  double worst = 0.0;
  std::size_t violations = 0;
  double young_worst = 0.0;
  // Young triples 1 + 1/p = 1/p1 + 1/p2 on the same inputs, for comparison.
  const std::vector<std::array<double, 3>> young{
      {3.0, 1.5, 1.5}, {4.0, 2.0, 4.0 / 3.0}, {2.0, 4.0 / 3.0, 4.0 / 3.0}, {6.0, 2.0, 1.5}, {1.0, 1.0, 1.0}};
  for (int i = 0; i < 50; ++i) {
    const auto f = random_symbol(rng, 256, 256);
    const auto x = random_sequence(rng, 256, 256);
    const auto g = toeplitz(f, x);
    for (const auto& [p, p1, p2] : triples) {
      const double ratio = lp_norm(g, p) / (lp_norm(f, p2) * lp_norm(x, p1));
      worst = std::max(worst, ratio);
      if (ratio > 1.0 + 1e-9) ++violations;
    }
    for (const auto& [p, p1, p2] : young) {
      young_worst = std::max(young_worst, lp_norm(g, p) / (lp_norm(f, p2) * lp_norm(x, p1)));
    }
  }
  return {violations == 0, fmt("max ratio %.6g, %g of 250 checks violated; under 1+1/p=1/p1+1/p2 max ratio %.6g",
                               worst, static_cast<double>(violations), young_worst)};
}

Outcome criterion8(const fs::path&) {
  const std::vector<std::string> configs{
      R"({"command": "verify", "seed": 8, "p_grid": {"min": 1, "max": 8, "count": 64},
          "operation": {"kind": "product"},
          "inputs": [{"kind": "gaussian", "sigma": 0.4, "box": [-1, 1], "n": 512},
                     {"kind": "power_profile", "a": 1.5, "box": [-1, 1], "n": 512}],
          "psis": [{"kind": "natural"}, {"kind": "natural"}]})",
      R"({"command": "verify", "seed": 8, "p_grid": {"min": 1, "max": 16, "count": 64},
          "operation": {"kind": "tensor"},
          "inputs": [{"kind": "gaussian", "sigma": 1, "box": [-6, 6], "n": 128},
                     {"kind": "indicator", "fraction": 0.3, "box": [0, 1], "n": 100, "measure": "lebesgue"}],
          "psis": [{"kind": "natural"}, {"kind": "natural"}]})",
      R"({"command": "verify", "seed": 8, "p_grid": {"min": 1, "max": 8, "count": 64},
          "operation": {"kind": "convolution"},
          "inputs": [{"kind": "trig_polynomial", "degree": 3, "dims": 1, "n": 128},
                     {"kind": "trig_polynomial", "degree": 4, "dims": 1, "n": 128}],
          "psis": [{"kind": "natural"}, {"kind": "natural"}]})",
      R"({"command": "verify", "seed": 8, "p_grid": {"min": 1, "max": 16, "count": 64},
          "operation": {"kind": "infimal_convolution"},
          "inputs": [{"kind": "power_profile", "a": 2, "box": [-1, 1], "n": 512},
                     {"kind": "power_profile", "a": 0.5, "box": [-1, 1], "n": 512}],
          "psis": [{"kind": "natural"}]})"};
  const char* names[] = {"product", "tensor", "convolution", "infimal"};
  bool pass = true;
  std::string detail;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    auto cfg = cli::parse_config(configs[i]);
    cfg.tolerance = 1e-6;
    const auto r = cli::run(cfg);
    const auto pos = r.report.find("max_ratio=");
    const std::string ratio = pos == std::string::npos ? "error: " + r.message
                                                       : r.report.substr(pos + 10, r.report.find('\t', pos) - pos - 10);
    pass = pass && r.exit_code == cli::kSuccess;
    detail += std::string(i ? ", " : "") + names[i] + " " + ratio;
  }
  return {pass, "max ratio " + detail};
}

Outcome criterion9() {
  const auto bound = combine_maximal(1.0, 2, 1.0);
  const double z1 = bound.kappa(1.0).value();
  const auto fit = fit_growth_exponent(bound.kappa, 2.0, 64.0);
  std::vector<double> x;
  std::vector<double> y;
  for (double p : log_spaced_grid(2.0, 64.0, 32)) {
    x.push_back(std::log(p));
    y.push_back(std::log(bound.envelope(p)));
  }
  const auto env_fit = least_squares_line(x, y);
  return {std::abs(z1 - 16.0) <= 1e-8,
          fmt("Z(1) = %.12g; fitted slope on [2,64] %.4f; slope of c^d (dp/(dp-1))^{d(gamma+1)} %.4f", z1, fit.slope, env_fit.slope) +
              fmt(" (power exponent d(gamma+1) = %g)", bound.envelope_exponent)};
}

Outcome criterion10() {
  // Standard normal sample on a probability grid.
  Rng rng(10);
  const std::size_t n = 1u << 20;
  std::vector<double> v(n);
  for (auto& s : v) s = rng.normal();
  const GridFunction f({Axis{0.0, 1.0, n}}, Measure::uniprob, false, std::move(v));
  const auto ys = log_spaced_grid(1.0, 4.0, 32);
  const auto fit = fit_power_psi_from_tail(empirical_tail(f, ys));
  const auto wide = fit_power_psi_from_tail(empirical_tail(f, log_spaced_grid(2.0, 4.5, 32)));
  return {fit.gamma >= 0.425 && fit.gamma <= 0.575,
          fmt("gamma = %.4f on y in [1,4] (rms %.3g); gamma = %.4f on y in [2,4.5]", fit.gamma, fit.residual,
              wide.gamma)};
}

Outcome criterion11(const fs::path& config_dir) {
  const auto base = fs::temp_directory_path() / "gls_acceptance_determinism";
  fs::remove_all(base);
  std::size_t same = 0;
  std::size_t total = 0;
  std::string bad;
  for (const char* name : {"infimal_bound.json", "power_tail.json", "gaussian_tensor_verify.json"}) {
    const auto ra = cli::run_file(config_dir / name, base / "a");
    const auto rb = cli::run_file(config_dir / name, base / "b");
    ++total;
    if (ra.report.empty() || ra.exit_code != rb.exit_code) {
      bad += std::string(" ") + name;
      continue;
    }
    auto slurp = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    const auto c = cli::parse_config(slurp(config_dir / name));
    const auto a = slurp(base / "a" / c.output);
    const auto b = slurp(base / "b" / c.output);
    if (!a.empty() && a == b) {
      ++same;
    } else {
      bad += std::string(" ") + name;
    }
  }
  fs::remove_all(base);
  return {same == total, fmt("%g of %g reports byte-identical", static_cast<double>(same), static_cast<double>(total)) +
                             (bad.empty() ? "" : "; differing:" + bad)};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path config_dir = argc > 1 ? fs::path(argv[1]) : fs::path("tools/configs");
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"split minima against brute force", criterion1},
      {"conjugate and tail closed form", criterion2},
      {"natural psi has unit norm", criterion3},
      {"tensor multiplicativity", criterion4},
      {"Young/Beckner certificate on the torus", criterion5},
      {"infimal convolution sharpness", criterion6},
      {"Toeplitz constant-1 certificate", criterion7},
      {"layer bound end-to-end", [&] { return criterion8(config_dir); }},
      {"maximal operator exponent", criterion9},
      {"Gaussian tail shape recovery", criterion10},
      {"CLI determinism", [&] { return criterion11(config_dir); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %zu: %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
