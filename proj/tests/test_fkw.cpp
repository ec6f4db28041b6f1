#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "betacrit/fkw.hpp"

using namespace betacrit;

namespace {

ProblemSpec fkw_ball(int d) { return ProblemSpec::exterior_ball(d, 1.0, BoundaryCondition::Fkw); }

// Sector-0 zero-flux resolvent kernel of -Delta + kappa^2 outside the unit
// ball in R^3, written for w = r u: -w'' + kappa^2 w = delta with
// w'(1) = w(1). Returned in the sector normalization (divided by 4 pi).
double neumann_kernel_3d(double kappa, double r, double rho) {
  const double lo = std::min(r, rho), hi = std::max(r, rho);
  auto phi = [&](double x) { return std::cosh(kappa * (x - 1)) + std::sinh(kappa * (x - 1)) / kappa; };
  auto dphi = [&](double x) { return kappa * std::sinh(kappa * (x - 1)) + std::cosh(kappa * (x - 1)); };
  auto psi = [&](double x) { return std::exp(-kappa * x); };
  auto dpsi = [&](double x) { return -kappa * std::exp(-kappa * x); };
  const double wr = dphi(lo) * psi(lo) - phi(lo) * dpsi(lo);
  return phi(lo) * psi(hi) / wr / (r * rho) / (4.0 * std::numbers::pi);
}

double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

} // namespace

TEST(Gamma1, FreeClosedForms) {
  for (double lambda : {-4.0, -1.0, -1e-2, -1e-6}) {
    const double kappa = std::sqrt(-lambda);
    EXPECT_NEAR(gamma1(fkw_ball(3), 0.0, Potential::zero(), lambda), kappa + 1.0, 1e-9);
    EXPECT_NEAR(gamma1(fkw_ball(1), 0.0, Potential::zero(), lambda), kappa, 1e-9);
    const double d2 = kappa * std::cyl_bessel_k(1, kappa) / std::cyl_bessel_k(0, kappa);
    EXPECT_NEAR(gamma1(fkw_ball(2), 0.0, Potential::zero(), lambda) / d2, 1.0, 1e-9);
  }
  EXPECT_NEAR(gamma1(fkw_ball(3), 0.0, Potential::zero(), -1.0), 2.0, 1e-12);
}

TEST(Gamma1, ThresholdLimits) {
  EXPECT_NEAR(gamma1(fkw_ball(3), 0.0, Potential::zero(), -1e-10), 1.0, 1e-4);
  double prev = 1.0;
  for (int j = 1; j <= 8; ++j) {
    const double g = gamma1(fkw_ball(2), 0.0, Potential::zero(), -std::pow(10.0, -j));
    EXPECT_GT(g, 0.0);
    EXPECT_LT(g, prev);
    prev = g;
  }
  EXPECT_LT(prev, 0.15);
}

TEST(Gamma1, PositiveWithPotentialBelowThreshold) {
  const Potential v = Potential::indicator(1.5, 2.5);
  for (double lambda : {-10.0, -3.0, -1.0, -0.1})
    EXPECT_GT(gamma1(fkw_ball(3), 0.2, v, lambda), 0.0) << lambda;
}

TEST(Gamma1, AuxiliaryRangeAndErrors) {
  const AuxiliarySolution v = solve_v(fkw_ball(3), 0.0, Potential::zero(), -1.0);
  EXPECT_DOUBLE_EQ(v(1.0), 1.0);
  EXPECT_NEAR(v(2.0), std::exp(-1.0) / 2.0, 1e-12);
  EXPECT_THROW(v(0.5), DomainError);
  EXPECT_THROW(solve_v(ProblemSpec::half_line(BoundaryCondition::Dirichlet), 0.0, Potential::zero(), -1.0),
               ValidationError);
  EXPECT_THROW(solve_v(fkw_ball(3), 0.0, Potential::zero(), 1.0), DomainError);
}

TEST(Kernel, MatchesZeroFluxResolvent) {
  for (double lambda : {-1.0, -0.04}) {
    const double kappa = std::sqrt(-lambda);
    for (double r : {1.0, 1.3, 2.0})
      for (double rho : {1.1, 1.7, 3.0})
        EXPECT_NEAR(fkw_sector0_kernel(fkw_ball(3), lambda, r, rho) / neumann_kernel_3d(kappa, r, rho), 1.0, 1e-8)
            << r << " " << rho;
  }
}

TEST(Kernel, Symmetric) {
  for (int d : {2, 3})
    EXPECT_NEAR(fkw_sector0_kernel(fkw_ball(d), -0.5, 1.2, 2.4), fkw_sector0_kernel(fkw_ball(d), -0.5, 2.4, 1.2), 1e-12);
}

TEST(Solve, RadialSourceHasZeroFluxAndMatchesResolvent) {
  const double lambda = -1.0, kappa = 1.0;
  std::vector<SectorSource> src{{0, 1.5, 2.5, [](double) { return 1.0; }}};
  const FkwSolution sol = solve_fkw(fkw_ball(3), 0.0, Potential::zero(), lambda, src);
  EXPECT_NEAR(sol.boundary_flux(0), 0.0, 1e-10);
  EXPECT_NEAR(sol.gamma1, 2.0, 1e-12);
  EXPECT_NEAR(sol.alpha, -sol.gamma / sol.gamma1, 1e-15);
  for (double r : {1.0, 1.5, 2.0, 3.0}) {
    auto integrand = [&](double rho) { return 4.0 * std::numbers::pi * neumann_kernel_3d(kappa, r, rho) * rho * rho; };
    const double lo = std::clamp(r, 1.5, 2.5);
    const double expect = simpson(integrand, 1.5, lo) + simpson(integrand, lo, 2.5);
    EXPECT_NEAR(sol.u(0, r), expect, 1e-8 * std::abs(expect)) << r;
  }
}

TEST(Solve, HigherSectorVanishesOnObstacle) {
  std::vector<SectorSource> src{{1, 1.5, 2.5, [](double r) { return r - 1.5; }},
                                {0, 2.0, 3.0, [](double) { return 2.0; }}};
  const FkwSolution sol = solve_fkw(fkw_ball(3), 0.5, Potential::indicator(1.5, 2.5), -0.5, src);
  EXPECT_NEAR(sol.u(1, 1.0), 0.0, 1e-14);
  EXPECT_NEAR(sol.boundary_flux(0), 0.0, 1e-9 * std::abs(sol.gamma));
  ASSERT_EQ(sol.sector_profiles.size(), 2u);
  EXPECT_EQ(sol.sector_profiles[1].sector, 1);
  EXPECT_THROW(solve_fkw(fkw_ball(3), 0.0, Potential::zero(), 0.0, src), DomainError);
  std::vector<SectorSource> bad{{0, 0.5, 2.0, [](double) { return 1.0; }}};
  EXPECT_THROW(solve_fkw(fkw_ball(3), 0.0, Potential::zero(), -1.0, bad), ValidationError);
}

TEST(NormLimit, BoundedInThreeDivergentInTwo) {
  Numerics num;
  num.max_sector = 1;
  std::vector<double> grid;
  for (int j = 2; j <= 7; ++j) grid.push_back(-std::pow(10.0, -j));
  const auto d3 = fkw_norm_limit(fkw_ball(3), Potential::indicator(1.5, 2.5), grid, num);
  EXPECT_EQ(d3.kind, LimitKind::Bounded);
  EXPECT_EQ(d3.curves.size(), 2u);
  EXPECT_EQ(d3.gamma1.size(), grid.size());
  const auto d2 = fkw_norm_limit(fkw_ball(2), Potential::indicator(1.5, 2.5), grid, num);
  EXPECT_EQ(d2.kind, LimitKind::Divergent);
  EXPECT_TRUE(d2.verdicts.front().logarithmic);
}

TEST(BetaCritical, ThreeDimensionalPhaseOracle) {
  // sector 0 with zero flux: w = r on [1, 1.5], so k + arctan(1.5 k) = pi/2
  double lo = 0.1, hi = 1.5;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid + std::atan(1.5 * mid) > 0.5 * std::numbers::pi ? hi : lo) = mid;
  }
  Numerics num;
  num.max_sector = 2;
  const FkwBeta b = beta_critical_fkw(fkw_ball(3), Potential::indicator(1.5, 2.5), num);
  EXPECT_EQ(b.status, BetaStatus::Positive);
  EXPECT_NEAR(b.beta_cr / (lo * lo), 1.0, 1e-5);
  EXPECT_NEAR(b.direct.beta_cr / b.beta_cr, 1.0, 1e-3);
}

TEST(BetaCritical, TwoDimensionalIsZero) {
  const FkwBeta b = beta_critical_fkw(fkw_ball(2), Potential::indicator(1.5, 2.5));
  EXPECT_EQ(b.status, BetaStatus::Zero);
  EXPECT_EQ(b.beta_cr, 0.0);
}
