#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "gls/error.hpp"
#include "gls/grid_function.hpp"

namespace gls {

/// Seeded generator with platform-independent draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 1) : engine_(seed) {}

  /// Uniform on [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

  /// Standard normal by Box-Muller.
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

inline std::vector<Axis> cube_axes(std::size_t dims, double lo, double hi, std::size_t n) {
  return std::vector<Axis>(dims, Axis{lo, hi, n});
}

/// exp(-|x|^2 / (2 sigma^2)).
inline GridFunction gaussian_grid(double sigma, std::vector<Axis> axes, Measure measure = Measure::lebesgue) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::invalid_parameter, "sigma must be > 0");
  return GridFunction::sample(std::move(axes), measure, false, [sigma](std::span<const double> x) {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    return std::exp(-r2 / (2.0 * sigma * sigma));
  });
}

/// |x|^a with |x| the Euclidean length.
inline GridFunction power_profile(double a, std::vector<Axis> axes, Measure measure = Measure::lebesgue) {
  return GridFunction::sample(std::move(axes), measure, false, [a](std::span<const double> x) {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    return std::pow(std::sqrt(r2), a);
  });
}

/// Indicator of a random set holding round(fraction * N) cells.
inline GridFunction indicator_grid(double fraction, std::vector<Axis> axes, Rng& rng,
                                   Measure measure = Measure::uniprob) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw Error(ErrorCode::invalid_parameter, "fraction must be in [0, 1]");
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.n;
  std::vector<std::size_t> order(total);
  for (std::size_t i = 0; i < total; ++i) order[i] = i;
  for (std::size_t i = total; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
  std::vector<double> v(total, 0.0);
  for (std::size_t i = 0; i < count; ++i) v[order[i]] = 1.0;
  return GridFunction(std::move(axes), measure, false, std::move(v));
}

/// |sum_k c_k e^{i k.x}|^2 on [0, 2 pi)^d with random complex c_k, |k_j| <= degree.
inline GridFunction trig_polynomial(Rng& rng, std::size_t degree, std::size_t dims, std::size_t n) {
  const int deg = static_cast<int>(degree);
  const int side = 2 * deg + 1;
  std::size_t terms = 1;
  for (std::size_t a = 0; a < dims; ++a) terms *= static_cast<std::size_t>(side);
  std::vector<std::pair<std::vector<int>, std::complex<double>>> coef;
  for (std::size_t t = 0; t < terms; ++t) {
    std::vector<int> k(dims);
    std::size_t r = t;
    for (std::size_t a = 0; a < dims; ++a) {
      k[a] = static_cast<int>(r % static_cast<std::size_t>(side)) - deg;
      r /= static_cast<std::size_t>(side);
    }
    const double re = rng.normal();
    const double im = rng.normal();
    coef.emplace_back(std::move(k), std::complex<double>(re, im));
  }
  return GridFunction::sample(cube_axes(dims, 0.0, 2.0 * std::numbers::pi, n), Measure::lebesgue, true,
                              [&coef](std::span<const double> x) {
                                std::complex<double> s = 0.0;
                                for (const auto& [k, c] : coef) {
                                  double phase = 0.0;
                                  for (std::size_t a = 0; a < k.size(); ++a) phase += k[a] * x[a];
                                  s += c * std::polar(1.0, phase);
                                }
                                return std::norm(s);
                              });
}

/// Independent uniform values on [lo, hi).
inline GridFunction random_grid(Rng& rng, std::vector<Axis> axes, Measure measure, double lo = 0.0, double hi = 1.0,
                                bool periodic = false) {
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.n;
  std::vector<double> v(total);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return GridFunction(std::move(axes), measure, periodic, std::move(v));
}

/// Random values on `count` distinct rationals a/b with a, b <= n_max.
inline SequenceFunction random_symbol(Rng& rng, std::int64_t n_max, std::size_t count) {
  SequenceFunction::Map m;
  std::size_t guard = 0;
  while (m.size() < count && guard++ < 64 * count + 64) {
    const auto a = static_cast<std::int64_t>(rng.index(static_cast<std::size_t>(n_max))) + 1;
    const auto b = static_cast<std::int64_t>(rng.index(static_cast<std::size_t>(n_max))) + 1;
    m[Rational::make(a, b)] = rng.uniform(-1.0, 1.0);
  }
  return SequenceFunction(std::move(m));
}

/// Random values on `count` distinct integers in [1, n_max].
inline SequenceFunction random_sequence(Rng& rng, std::int64_t n_max, std::size_t count) {
  SequenceFunction::Map m;
  std::size_t guard = 0;
  while (m.size() < count && guard++ < 64 * count + 64) {
    const auto k = static_cast<std::int64_t>(rng.index(static_cast<std::size_t>(n_max))) + 1;
    m[Rational{k, 1}] = rng.uniform(-1.0, 1.0);
  }
  return SequenceFunction(std::move(m));
}

}  // namespace gls
