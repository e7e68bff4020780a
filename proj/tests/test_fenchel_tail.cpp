#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "gls/fenchel.hpp"
#include "gls/psi.hpp"

using namespace gls;

namespace {

// Dense brute-force sup of p v - gamma p ln p over [1, hi].
double brute_conjugate(double gamma, double v, double hi = 1e4) {
  double best = -1e300;
  const int n = 400000;
  for (int i = 0; i <= n; ++i) {
    const double p = std::exp(std::log(hi) * i / n);
    best = std::max(best, p * v - gamma * p * std::log(p));
  }
  return best;
}

}  // namespace

TEST(Conjugate, LinearOnBoundedInterval) {
  const auto psi = make_power(1.0, 0.0, PInterval::closed(1.0, 2.0));
  const auto r = fenchel_conjugate(psi, 1.0);
  EXPECT_NEAR(r.value, 2.0, 1e-12);
  EXPECT_NEAR(r.maximizer, 2.0, 1e-12);
  EXPECT_TRUE(r.boundary);
}

TEST(Conjugate, PowerInteriorMaximizer) {
  const auto r = fenchel_conjugate(make_power(1.0, 1.0), 2.0);
  EXPECT_NEAR(r.value, std::numbers::e, 1e-9);
  EXPECT_NEAR(r.maximizer, std::numbers::e, 1e-4);
  EXPECT_NEAR(r.value, brute_conjugate(1.0, 2.0), 1e-6);
  EXPECT_FALSE(r.boundary);
}

TEST(Conjugate, PowerBoundaryAtOne) {
  const auto r = fenchel_conjugate(make_power(1.0, 1.0), 0.0);
  EXPECT_NEAR(r.value, 0.0, 1e-12);
  EXPECT_NEAR(r.maximizer, 1.0, 1e-12);
  EXPECT_TRUE(r.boundary);
}

TEST(Conjugate, DivergesForFlatPsi) {
  const auto r = fenchel_conjugate(make_power(1.0, 0.0), 0.5);
  EXPECT_TRUE(r.diverges());
}

TEST(Conjugate, DegenerateIsLinear) {
  const auto r = fenchel_conjugate(make_degenerate(3.0), 2.0);
  EXPECT_DOUBLE_EQ(r.value, 6.0);
}

TEST(Conjugate, MatchesBruteForceAcrossGammas) {
  for (double g : {0.3, 0.7, 1.5}) {
    for (double v : {g, 1.5 * g + 0.2, 3.0}) {
      EXPECT_NEAR(fenchel_conjugate(make_power(1.0, g), v).value, brute_conjugate(g, v), 1e-5 * (1 + brute_conjugate(g, v)));
    }
  }
}

TEST(Conjugate, ConvexInV) {
  const auto psi = make_power(2.0, 0.75);
  std::vector<double> h;
  const auto vs = linear_grid(0.0, 4.0, 41);
  for (double v : vs) h.push_back(fenchel_conjugate(psi, v).value);
  for (std::size_t i = 1; i + 1 < h.size(); ++i) EXPECT_GE(h[i - 1] + h[i + 1] - 2.0 * h[i], -1e-8);
}

TEST(TailBound, HalfPowerAtTwo) {
  const double t = tail_bound(make_power(1.0, 0.5), 1.0, 2.0);
  EXPECT_NEAR(t, std::exp(-0.5 * std::exp(-1.0) * 4.0), 1e-9);
  EXPECT_NEAR(t, 0.4792, 1e-4);
}

TEST(TailBound, VacuousAtThreshold) {
  EXPECT_DOUBLE_EQ(tail_bound(make_power(1.0, 0.5), 1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(tail_bound(make_power(1.0, 3.0), 2.5, 2.5), 1.0);
}

TEST(TailBound, BelowValidity) {
  try {
    tail_bound(make_power(1.0, 1.0), 2.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::below_validity);
  }
}

TEST(TailBound, MatchesClosedFormWhenInterior) {
  for (double g : {0.25, 0.5, 1.0, 2.0}) {
    const double k = 1.7;
    for (double y : {k * std::exp(g), k * std::exp(g) * 2.0, k * std::exp(g) * 10.0}) {
      const double a = tail_bound(make_power(1.0, g), k, y);
      const double b = power_tail_closed_form(g, k, y);
      EXPECT_NEAR(a, b, 1e-6 * b) << g << " " << y;
    }
  }
}

TEST(TailBound, Nonincreasing) {
  const auto psi = make_power(1.0, 0.8);
  double prev = 1.0;
  for (double y = 1.0; y < 60.0; y *= 1.1) {
    const double t = tail_bound(psi, 1.0, y);
    EXPECT_LE(t, prev + 1e-15);
    prev = t;
  }
}

TEST(ClosedForm, Examples) {
  EXPECT_NEAR(power_tail_closed_form(1.0, 1.0, std::numbers::e), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(power_tail_closed_form(0.5, 1.0, 1.0), 0.8320, 1e-4);
  EXPECT_NEAR(power_tail_closed_form(3.0, 2.0, 2.0), std::exp(-3.0 / std::numbers::e), 1e-15);
  EXPECT_THROW(power_tail_closed_form(1.0, 2.0, 1.0), Error);
}

TEST(Fit, RecoversGeneratingModel) {
  std::vector<TailPoint> pts;
  for (double y = 1.0; y <= 6.0; y += 0.25) pts.push_back({y, power_tail_closed_form(0.5, 1.0, y)});
  const auto fit = fit_power_psi_from_tail(TailCurve(pts, 1.0));
  EXPECT_NEAR(fit.gamma, 0.5, 1e-6);
  EXPECT_NEAR(fit.k, 1.0, 1e-6);
  EXPECT_LT(fit.residual, 1e-10);
}

TEST(Fit, DropsZeroTail) {
  std::vector<TailPoint> pts;
  for (double y = 1.0; y <= 4.0; y += 0.25) pts.push_back({y, power_tail_closed_form(1.0, 1.0, y)});
  const std::size_t kept = pts.size();
  for (double y = 4.5; y <= 6.0; y += 0.5) pts.push_back({y, 0.0});
  const auto fit = fit_power_psi_from_tail(TailCurve(pts, 1.0));
  EXPECT_NEAR(fit.gamma, 1.0, 1e-6);
  EXPECT_LE(fit.points_used, kept);
}

TEST(Fit, InsufficientPoints) {
  const TailCurve curve({{1.0, 0.4}, {2.0, 0.1}, {3.0, 0.0}}, 1.0);
  try {
    fit_power_psi_from_tail(curve);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::insufficient_points);
  }
}

TEST(Fit, FlatTailIsDegenerate) {
  const TailCurve curve({{1.0, 0.3}, {2.0, 0.3}, {3.0, 0.3}}, 1.0);
  EXPECT_THROW(fit_power_psi_from_tail(curve), Error);
}

TEST(TailCurveFormat, RoundTripAndValidation) {
  const TailCurve curve({{1.0, 0.5}, {2.0, 0.25}, {4.0, 0.0}}, 1.0);
  std::stringstream ss;
  write_tail_curve(ss, curve);
  const auto back = read_tail_curve(ss);
  ASSERT_EQ(back.points().size(), 3u);
  EXPECT_EQ(back.points()[1].t, 0.25);
  EXPECT_THROW(TailCurve({{2.0, 0.5}, {1.0, 0.4}}), Error);
  EXPECT_THROW(TailCurve({{1.0, 0.2}, {2.0, 0.4}}), Error);
  EXPECT_THROW(TailCurve({{1.0, 2.0}}, 1.0), Error);
}
