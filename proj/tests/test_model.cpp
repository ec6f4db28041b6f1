#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "betacrit/model.hpp"

using namespace betacrit;

namespace {

bool has_code(const std::vector<Diagnostic>& d, const std::string& code) {
  for (const auto& x : d)
    if (x.code == code) return true;
  return false;
}

} // namespace

TEST(HFactor, Values) {
  EXPECT_DOUBLE_EQ(h_factor(1, 10.0), 10.0);
  EXPECT_DOUBLE_EQ(h_factor(3, 10.0), 100.0);
  EXPECT_NEAR(h_factor(2, 10.0), 43.429448190325, 1e-9);
  EXPECT_DOUBLE_EQ(h_factor(3, 2.0), 4.0);
}

TEST(HFactor, DomainErrors) {
  EXPECT_THROW(h_factor(2, 1.0), DomainError);
  EXPECT_THROW(h_factor(2, 0.5), DomainError);
  EXPECT_THROW(h_factor(1, 0.0), DomainError);
  EXPECT_THROW(h_factor(4, 2.0), DomainError);
}

TEST(HFactor, StrictlyIncreasing) {
  for (int d = 1; d <= 3; ++d) {
    double prev = h_factor(d, 2.0);
    for (double n = 3.0; n <= 1e6; n *= 1.5) {
      const double h = h_factor(d, n);
      EXPECT_GT(h, prev) << "d=" << d << " n=" << n;
      prev = h;
    }
  }
}

TEST(PiecewiseLinear, InterpolatesAndRejectsBadKnots) {
  PiecewiseLinear f({0.0, 1.0, 3.0}, {0.0, 2.0, 0.0});
  EXPECT_DOUBLE_EQ(f(0.5), 1.0);
  EXPECT_DOUBLE_EQ(f(2.0), 1.0);
  EXPECT_THROW(PiecewiseLinear({0.0, 0.0}, {1.0, 1.0}), ValidationError);
  EXPECT_THROW(PiecewiseLinear({0.0, 1.0}, {1.0}), ValidationError);
}

TEST(PiecewiseLinear, MomentsMatchClosedForms) {
  // hat on [1, 3] peaking at 2: integral 1, first radial moment int r f = 2
  PiecewiseLinear hat({1.0, 2.0, 3.0}, {0.0, 1.0, 0.0});
  EXPECT_NEAR(hat.moment(1.0, 3.0, 0), 1.0, 1e-14);
  EXPECT_NEAR(hat.moment(1.0, 3.0, 1), 2.0, 1e-14);
  // int_1^3 r^2 f = 4 + 1/6 (symmetric hat: E[r^2] = 4 + Var = 4 + 1/6)
  EXPECT_NEAR(hat.moment(1.0, 3.0, 2), 4.0 + 1.0 / 6.0, 1e-13);
}

TEST(RealizeScaled, HalfLineExamples) {
  ScaledPotentialFamily f;
  f.base = UnitProfile::indicator();
  f.offset = 1.0;
  f.decay = 1.0;
  const Potential v = realize_scaled(f, 4.0);
  EXPECT_NEAR(v.lo(), 0.0, 1e-15);
  EXPECT_NEAR(v.hi(), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(v(0.25), 4.0);
  EXPECT_DOUBLE_EQ(v(0.6), 0.0);

  f.offset = 2.0;
  const Potential w = realize_scaled(f, 1.0);
  EXPECT_NEAR(w.lo(), 1.0, 1e-15);
  EXPECT_NEAR(w.hi(), 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(w(2.0), 1.0);
}

TEST(RealizeScaled, BallAmplitude) {
  ScaledPotentialFamily f;
  f.dimension = 3;
  f.base = UnitProfile::bump();
  f.offset = 2.0;
  const Potential v = realize_scaled(f, 2.0);
  EXPECT_DOUBLE_EQ(v.amplitude(), 4.0);
  EXPECT_DOUBLE_EQ(v.radius(), 0.5);
  EXPECT_DOUBLE_EQ(v.center(), 1.0);
}

TEST(RealizeScaled, SupportMeasureProperty) {
  for (int d = 1; d <= 3; ++d) {
    ScaledPotentialFamily f;
    f.dimension = d;
    f.offset = 3.0;
    f.decay = 0.5;
    const double unit = d == 1 ? 2.0 : d == 2 ? std::numbers::pi : 4.0 * std::numbers::pi / 3.0;
    for (double n : {2.0, 4.0, 8.0, 16.0}) {
      const Potential v = realize_scaled(f, n);
      EXPECT_NEAR(v.support_measure(), unit * std::pow(1.0 / n, d), 1e-12 * unit) << "d=" << d << " n=" << n;
    }
  }
}

TEST(RealizeScaled, LeakIsRejected) {
  ScaledPotentialFamily f;
  f.offset = 0.5; // x(n) = 0.5/n < 1/n: the support crosses the boundary
  EXPECT_THROW(realize_scaled(f, 4.0), ValidationError);
  f.offset = 1.0;
  f.decay = 0.0; // x(n) = 1, support [1 - 1/n, 1 + 1/n]
  EXPECT_NO_THROW(realize_scaled(f, 1.0));
  EXPECT_THROW(realize_scaled(f, 0.5), ValidationError);
  const std::vector<double> grid{2.0, 1.0, 0.5, 0.25};
  EXPECT_EQ(first_inadmissible(f, grid), std::optional<double>(0.5));
}

TEST(Validate, Examples) {
  EXPECT_TRUE(validate(ProblemSpec::half_line(BoundaryCondition::Dirichlet), Potential::indicator(1, 2)).empty());

  const auto d1 = validate(ProblemSpec::exterior_ball(3, 1.0, BoundaryCondition::Dirichlet), Potential::indicator(0.5, 2));
  ASSERT_FALSE(d1.empty());
  EXPECT_EQ(d1.front().message, "support outside domain");

  const auto d2 = validate(ProblemSpec::half_line(BoundaryCondition::Dirichlet), Potential::sampled({1, 2, 3}, {1, -0.1, 1}));
  ASSERT_FALSE(d2.empty());
  EXPECT_EQ(d2.front().message, "potential not nonnegative");
}

TEST(Validate, ProblemInvariants) {
  EXPECT_TRUE(has_code(validate(ProblemSpec::exterior_ball(3, 0.0, BoundaryCondition::Dirichlet), Potential::zero()),
                       "inner_radius"));
  EXPECT_TRUE(has_code(validate(ProblemSpec::half_line(BoundaryCondition::Fkw), Potential::zero()), "bc"));
  ProblemSpec bad_a = ProblemSpec::exterior_ball(3, 1.0, BoundaryCondition::Dirichlet, 0,
                                                 CoefficientProfile({1.0, 2.0}, {0.5, 0.8}));
  EXPECT_TRUE(has_code(validate(bad_a, Potential::zero()), "coefficient"));
  ProblemSpec zero_a = ProblemSpec::exterior_ball(3, 1.0, BoundaryCondition::Dirichlet, 0,
                                                  CoefficientProfile({1.0, 2.0}, {0.0, 1.0}));
  EXPECT_TRUE(has_code(validate(zero_a, Potential::zero()), "coefficient"));
  ProblemSpec hl = ProblemSpec::half_line(BoundaryCondition::Dirichlet);
  hl.dimension = 2;
  EXPECT_TRUE(has_code(validate(hl, Potential::zero()), "geometry"));
  EXPECT_TRUE(has_code(validate(ProblemSpec::exterior_ball(2, 1.0, BoundaryCondition::Dirichlet, -1), Potential::zero()),
                       "sector"));
}

TEST(Potential, RadialPowerIntegral) {
  // int over 1.5 < |x| < 2.5 of 1 in R^3
  const Potential v = Potential::indicator(1.5, 2.5, 4.0);
  const double shell = 4.0 * std::numbers::pi * (std::pow(2.5, 3) - std::pow(1.5, 3)) / 3.0;
  EXPECT_NEAR(v.radial_power_integral(1.5, 3), 8.0 * shell, 1e-9 * shell);
  EXPECT_NEAR(v.radial_power_integral(1.0, 1), 4.0, 1e-14);
  EXPECT_NEAR(Potential::hat(1.0, 2.5).support_measure(), 1.5, 1e-14);
}

TEST(Geometry, SphereArea) {
  EXPECT_DOUBLE_EQ(sphere_area(1), 2.0);
  EXPECT_DOUBLE_EQ(sphere_area(2), 2.0 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(sphere_area(3), 4.0 * std::numbers::pi);
}
