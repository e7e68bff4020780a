#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "gls/corpus.hpp"
#include "gls/oracle.hpp"
#include "gls/psi.hpp"

using namespace gls;

namespace {

// (int exp(-p x^2 / 2) dx)^{1/p} over R.
double gaussian_moment(double p) { return std::pow(std::sqrt(2.0 * std::numbers::pi / p), 1.0 / p); }

MomentTable gaussian_table(const std::vector<double>& grid) {
  std::vector<MomentEntry> e;
  for (double p : grid) e.push_back({p, gaussian_moment(p)});
  return MomentTable(e);
}

}  // namespace

TEST(Extended, InfinityArithmetic) {
  const auto inf = ExtendedReal::infinity();
  EXPECT_TRUE((2.0 * inf).is_infinite());
  EXPECT_EQ((ExtendedReal(0.0) * inf).value(), 0.0);
  EXPECT_EQ(3.0 / inf, 0.0);
  EXPECT_DOUBLE_EQ(6.0 / ExtendedReal(2.0), 3.0);
  EXPECT_THROW(ExtendedReal(-1.0), Error);
  EXPECT_THROW(ExtendedReal(std::nan("")), Error);
}

TEST(Interval, ContainsAndIntersect) {
  const auto a = PInterval::make(1.0, 4.0, false, true);
  EXPECT_FALSE(a.contains(1.0));
  EXPECT_TRUE(a.contains(4.0));
  const auto b = PInterval::closed(4.0, 6.0);
  const auto c = a.intersect(b);
  ASSERT_TRUE(c);
  EXPECT_TRUE(c->is_point());
  EXPECT_FALSE(PInterval::open(1.0, 2.0).intersect(PInterval::closed(2.0, 3.0)));
  EXPECT_THROW(PInterval::make(0.5, 2.0, true, true), Error);
  EXPECT_THROW(PInterval::make(2.0, 1.0, true, true), Error);
}

TEST(MakePsi, PowerAtFour) { EXPECT_DOUBLE_EQ(make_power(1.0, 0.5)(4.0).value(), 2.0); }

TEST(MakePsi, DegenerateIsOneAtR) {
  const auto psi = make_degenerate(3.0);
  EXPECT_DOUBLE_EQ(psi(3.0).value(), 1.0);
  EXPECT_TRUE(psi(2.0).is_infinite());
  EXPECT_TRUE(psi.is_degenerate());
}

TEST(MakePsi, WindowMidpoint) {
  const auto psi = make_window(1.0, 2.0, 4.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(psi(3.0).value(), 1.0);
  EXPECT_DOUBLE_EQ(psi(2.5).value(), 1.0 / (0.5 * 1.5));
  EXPECT_TRUE(psi(2.0).is_infinite());
  EXPECT_TRUE(psi(4.0).is_infinite());
  EXPECT_TRUE(psi(5.0).is_infinite());
}

TEST(MakePsi, RationalExcludesOne) {
  const auto psi = make_rational(2.0, 1.0, 1.0);
  EXPECT_TRUE(psi(1.0).is_infinite());
  EXPECT_DOUBLE_EQ(psi(3.0).value(), 2.0 * 3.0 / 2.0);
  EXPECT_TRUE(make_rational(1.0, 1.0, 0.0)(1.0).is_finite());
}

TEST(MakePsi, ParameterErrors) {
  auto code = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::parse_error;
  };
  EXPECT_EQ(code([] { make_power(0.0, 1.0); }), ErrorCode::invalid_parameter);
  EXPECT_EQ(code([] { make_power(1.0, -1.0); }), ErrorCode::invalid_parameter);
  EXPECT_EQ(code([] { make_window(1.0, 4.0, 2.0, 1.0, 1.0); }), ErrorCode::invalid_parameter);
  EXPECT_EQ(code([] { make_degenerate(0.5); }), ErrorCode::invalid_parameter);
  EXPECT_EQ(code([] { make_window(1.0, 2.0, 4.0, 1.0, 1.0, PInterval::closed(5.0, 6.0)); }),
            ErrorCode::empty_domain);
}

TEST(EvalPsi, ProductAbsorbsInfinity) {
  const auto prod = make_product(make_power(1.0, 1.0), make_power(1.0, 2.0));
  EXPECT_DOUBLE_EQ(prod(2.0).value(), 8.0);
  const auto clipped = make_product(make_power(1.0, 1.0), make_window(1.0, 2.0, 4.0, 1.0, 1.0));
  EXPECT_TRUE(clipped(5.0).is_infinite());
  for (double p : {2.5, 3.0, 3.5}) {
    EXPECT_DOUBLE_EQ(clipped(p).value(), p * make_window(1.0, 2.0, 4.0, 1.0, 1.0)(p).value());
  }
}

TEST(EvalPsi, OffDomainIsInfinite) {
  const auto psi = make_power(1.0, 1.0, PInterval::closed(2.0, 5.0));
  EXPECT_TRUE(psi(1.5).is_infinite());
  EXPECT_TRUE(psi(5.5).is_infinite());
  EXPECT_TRUE(psi(0.5).is_infinite());
  EXPECT_DOUBLE_EQ(psi(2.0).value(), 2.0);
}

TEST(EvalPsi, NaturalGaussianLtwo) {
  // Quadrature of the discretized Gaussian against the closed form.
  const auto f = gaussian_grid(1.0, {Axis{-10.0, 10.0, 4000}});
  const auto table = moments_table(f, std::vector<double>{1.0, 1.5, 2.0, 3.0, 4.0});
  const auto psi = make_natural(table);
  EXPECT_NEAR(psi(2.0).value(), std::pow(std::numbers::pi, 0.25), 1e-9);
  EXPECT_NEAR(psi(2.0).value(), 1.3313, 1e-4);
  EXPECT_TRUE(psi(4.5).is_infinite());
}

TEST(EvalPsi, NaturalInterpolatesLogLinearly) {
  const MomentTable t({{1.0, 1.0}, {3.0, std::exp(2.0)}});
  EXPECT_NEAR(make_natural(t)(2.0).value(), std::exp(1.0), 1e-12);
}

TEST(GlsNorm, NaturalOfItselfIsOne) {
  const auto t = gaussian_table(log_spaced_grid(1.0, 20.0, 40));
  EXPECT_NEAR(gls_norm(t, make_natural(t)), 1.0, 1e-12);
  EXPECT_NEAR(gls_norm(t, make_scaled(2.0, make_natural(t))), 0.5, 1e-12);
}

TEST(GlsNorm, Homogeneous) {
  const auto t = gaussian_table(log_spaced_grid(1.0, 20.0, 40));
  const auto psi = make_power(1.0, 0.5);
  EXPECT_NEAR(gls_norm(t.scaled(3.5), psi), 3.5 * gls_norm(t, psi), 1e-12 * gls_norm(t, psi) * 3.5);
}

TEST(GlsNorm, DegenerateRecoversLebesgue) {
  const MomentTable t({{1.0, 0.5}, {2.0, 0.7071}, {4.0, 0.9}});
  EXPECT_EQ(gls_norm(t, make_degenerate(2.0)), 0.7071);
  EXPECT_NEAR(gls_norm(t, make_degenerate(3.0)), std::exp(0.5 * std::log(0.7071) + 0.5 * std::log(0.9)), 1e-15);
}

TEST(GlsNorm, EmptyIntersection) {
  const MomentTable t({{1.0, 0.5}, {2.0, 0.7}});
  try {
    gls_norm(t, make_power(1.0, 1.0, PInterval::closed(3.0, 4.0)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::empty_intersection);
  }
}

TEST(GlsNorm, ExplicitSupremum) {
  // Brute-force sup over the table grid.
  const auto grid = log_spaced_grid(1.0, 30.0, 50);
  const auto t = gaussian_table(grid);
  const auto psi = make_power(1.0, 0.5);
  double sup = 0.0;
  for (double p : grid) sup = std::max(sup, gaussian_moment(p) / std::sqrt(p));
  EXPECT_DOUBLE_EQ(gls_norm(t, psi), sup);
}

TEST(Convexity, PowerIsConvex) {
  for (double g : {0.25, 1.0, 3.0}) {
    const auto r = check_h_convexity(make_power(1.0, g), log_spaced_grid(1.0, 50.0, 100));
    EXPECT_TRUE(r.convex);
    EXPECT_LT(r.max_violation, 1e-9);
  }
}

TEST(Convexity, DegenerateVacuous) {
  const std::vector<double> grid{2.0};
  EXPECT_TRUE(check_h_convexity(make_degenerate(2.0), grid).convex);
}

TEST(Convexity, InverseShiftFailsBeyondTwo) {
  // h(p) = -p ln(p - 1) has h'' = (2 - p) / (p - 1)^2.
  const auto grid = linear_grid(1.1, 3.0, 39);
  const auto r = check_h_convexity(make_rational(1.0, 0.0, 1.0), grid);
  EXPECT_FALSE(r.convex);
  double expected = 0.0;
  for (double p : grid) expected = std::max(expected, (p - 2.0) / ((p - 1.0) * (p - 1.0)));
  EXPECT_NEAR(r.max_violation, expected, 0.02);
}

TEST(Convexity, Errors) {
  const std::vector<double> two{1.0, 2.0};
  EXPECT_THROW(check_h_convexity(make_power(1.0, 1.0), two), Error);
  const std::vector<double> outside{1.0, 2.0, 3.0};
  EXPECT_THROW(check_h_convexity(make_degenerate(2.0), outside), Error);
}

TEST(MomentTableFormat, RoundTrip) {
  const auto t = gaussian_table({1.0, 2.0, 3.5});
  std::stringstream ss;
  write_moment_table(ss, t);
  const auto back = read_moment_table(ss);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.entries()[i].p, t.entries()[i].p);
    EXPECT_EQ(back.entries()[i].moment, t.entries()[i].moment);
  }
}

TEST(MomentTableFormat, RejectsUnsortedAndNegative) {
  std::stringstream unsorted("glsmoments v1\n2\t1\n1\t1\n");
  EXPECT_THROW(read_moment_table(unsorted), Error);
  std::stringstream negative("glsmoments v1\n1\t-1\n");
  EXPECT_THROW(read_moment_table(negative), Error);
  std::stringstream header("moments\n1\t1\n");
  EXPECT_THROW(read_moment_table(header), Error);
}

TEST(MomentTable, ConvexityDefectWarns) {
  EXPECT_LE(gaussian_table(log_spaced_grid(1.0, 10.0, 20)).log_convexity_defect(), 1e-12);
  const MomentTable bent({{1.0, 1.0}, {2.0, 10.0}, {3.0, 1.0}});
  EXPECT_GT(bent.log_convexity_defect(), 0.0);
}
