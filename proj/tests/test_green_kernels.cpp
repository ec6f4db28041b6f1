#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "betacrit/bessel.hpp"
#include "betacrit/green_kernels.hpp"

using namespace betacrit;

namespace {

constexpr double kPi = std::numbers::pi;

// Vertex-grid finite differences for -(p u')' + p (c/r^2 - lambda) u = delta(r - rho)
// on [r0, L]. Left: Dirichlet or Neumann. Right: Robin u' = kappa u.
// Returns u at the grid nodes.
struct FdSolution {
  double r0, h;
  std::vector<double> u;
  double at(double r) const {
    const double s = (r - r0) / h;
    const std::size_t i = static_cast<std::size_t>(s);
    const double t = s - static_cast<double>(i);
    return (1 - t) * u[i] + t * u[std::min(i + 1, u.size() - 1)];
  }
};

FdSolution fd_green(int d, int l, double lambda, bool dirichlet, double r0, double length, double rho, double kappa,
                    double h, double a_in = 1.0, double r_a = 0.0) {
  const int n = static_cast<int>(std::lround(length / h));
  auto p = [&](double r) { return d == 1 ? 1.0 : std::pow(r, d - 1); };
  auto a = [&](double r) { return r < r_a ? a_in + (1.0 - a_in) * (r - r0) / (r_a - r0) : 1.0; };
  const double c = d == 1 ? 0.0 : static_cast<double>(l) * (l + d - 2);
  std::vector<double> lo(n + 1, 0.0), di(n + 1, 0.0), up(n + 1, 0.0), rhs(n + 1, 0.0);
  for (int i = 0; i <= n; ++i) {
    const double r = r0 + i * h;
    const double q = p(r) * ((c > 0 ? a(r) * c / (r * r) : 0.0) - lambda);
    const double pl = p(r - 0.5 * h) * a(r - 0.5 * h), pr = p(r + 0.5 * h) * a(r + 0.5 * h);
    if (i == 0) {
      if (dirichlet) {
        di[0] = 1.0;
        continue;
      }
      // half cell with zero flux
      di[0] = pr / (h * h) * 2.0 + q;
      up[0] = -pr / (h * h) * 2.0;
      continue;
    }
    if (i == n) {
      // half cell with flux p a u' = p a kappa u
      di[n] = 2.0 * pl / (h * h) - 2.0 * p(r) * a(r) * kappa / h + q;
      lo[n] = -2.0 * pl / (h * h);
      continue;
    }
    lo[i] = -pl / (h * h);
    up[i] = -pr / (h * h);
    di[i] = (pl + pr) / (h * h) + q;
  }
  const int k = static_cast<int>(std::lround((rho - r0) / h));
  rhs[k] = 1.0 / h;
  // Thomas
  for (int i = 1; i <= n; ++i) {
    const double w = lo[i] / di[i - 1];
    di[i] -= w * up[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> u(n + 1);
  u[n] = rhs[n] / di[n];
  for (int i = n - 1; i >= 0; --i) u[i] = (rhs[i] - up[i] * u[i + 1]) / di[i];
  return {r0, h, u};
}

double sl_residual(const RadialKernel& g, double r, double rho, double h) {
  const SectorOperator& op = g.sector();
  auto flux = [&](double s) { return op.p(s) * op.a(s) * (g(s + 0.5 * h, rho) - g(s - 0.5 * h, rho)) / h; };
  return -(flux(r + 0.5 * h) - flux(r - 0.5 * h)) / h + op.q(r) * g(r, rho);
}

} // namespace

// ---------------------------------------------------------------------------
// Bessel functions

TEST(Bessel, MatchesStandardLibrary) {
  for (double nu : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0})
    for (double x : {1e-3, 0.05, 0.7, 1.9, 2.1, 5.0, 17.0, 40.0}) {
      const double i_ref = std::cyl_bessel_i(nu, x), k_ref = std::cyl_bessel_k(nu, x);
      EXPECT_NEAR(bessel::bessel_i(nu, x) / i_ref, 1.0, 1e-10) << "I nu=" << nu << " x=" << x;
      EXPECT_NEAR(bessel::bessel_k(nu, x) / k_ref, 1.0, 1e-10) << "K nu=" << nu << " x=" << x;
    }
}

TEST(Bessel, ScaledWronskian) {
  // I_nu K_nu' - I_nu' K_nu = -1/x, in exponentially scaled form
  for (double nu : {0.0, 1.0, 2.0})
    for (double x : {0.01, 1.0, 50.0}) {
      const auto s = bessel::scaled(nu, x);
      EXPECT_NEAR(x * (s.i_nu * s.dk_nu(nu, x) - s.di_nu(nu, x) * s.k_nu), -1.0, 1e-10);
    }
}

// ---------------------------------------------------------------------------
// half-line kernels

TEST(HalflineKernel, ClosedFormAndBvpOracle) {
  const double expect = 0.5 * (std::exp(-1.0) - std::exp(-3.0));
  EXPECT_NEAR(halfline_kernel(BoundaryCondition::Dirichlet, -1.0, 1.0, 2.0), expect, 1e-15);
  // the value quoted to 6 digits is 0.159046
  EXPECT_NEAR(expect, 0.159046, 5e-7);
  // independent FD solve of -u'' + u = delta_2 on [0, 30], u(0) = 0, u'(30) = -u(30)
  const FdSolution fd = fd_green(1, 0, -1.0, true, 0.0, 30.0, 2.0, -1.0, 1e-3);
  EXPECT_NEAR(fd.at(1.0), expect, 1e-6);

  EXPECT_NEAR(halfline_kernel(BoundaryCondition::Neumann, -1.0, 0.0, 0.0), 1.0, 1e-15);
  const FdSolution fn = fd_green(1, 0, -1.0, false, 0.0, 30.0, 1.5, -1.0, 1e-3);
  EXPECT_NEAR(fn.at(0.5), halfline_kernel(BoundaryCondition::Neumann, -1.0, 0.5, 1.5), 1e-6);
}

TEST(HalflineKernel, BoundaryAndErrors) {
  EXPECT_NEAR(halfline_kernel(BoundaryCondition::Dirichlet, -1.0, 1e-12, 3.0), 0.0, 1e-11);
  EXPECT_THROW(halfline_kernel(BoundaryCondition::Dirichlet, 0.0, 1.0, 2.0), DomainError);
  EXPECT_THROW(halfline_kernel(BoundaryCondition::Neumann, 0.5, 1.0, 2.0), DomainError);
  EXPECT_THROW(halfline_limit_kernel(BoundaryCondition::Neumann, 1.0, 2.0), DivergentLimitError);
}

TEST(HalflineKernel, LimitKernel) {
  EXPECT_DOUBLE_EQ(halfline_limit_kernel(BoundaryCondition::Dirichlet, 1.0, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(halfline_limit_kernel(BoundaryCondition::Dirichlet, 0.7, 0.7), 0.7);
  EXPECT_DOUBLE_EQ(halfline_limit_kernel(BoundaryCondition::Dirichlet, 0.0, 5.0), 0.0);
  EXPECT_NEAR(halfline_kernel(BoundaryCondition::Dirichlet, -1e-8, 1.0, 2.0), 1.0, 1e-3);
}

TEST(HalflineKernel, LimitConsistencyRate) {
  // G_lambda = min(x, xi) - k x xi + O(k^2): the gap is O(sqrt|lambda|)
  for (double lambda : {-1e-2, -1e-4, -1e-6}) {
    const double k = std::sqrt(-lambda);
    for (double x : {0.1, 0.5, 1.0, 2.0})
      for (double xi : {0.2, 1.0, 3.0}) {
        const double gap = halfline_limit_kernel(BoundaryCondition::Dirichlet, x, xi) -
                           halfline_kernel(BoundaryCondition::Dirichlet, lambda, x, xi);
        EXPECT_GE(gap, -1e-15);
        EXPECT_LE(gap, 1.05 * k * x * xi + 1e-14);
      }
  }
}

TEST(HalflineKernel, SymmetryAndMonotonicity) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> pos(0.0, 5.0);
  for (auto bc : {BoundaryCondition::Dirichlet, BoundaryCondition::Neumann})
    for (int t = 0; t < 200; ++t) {
      const double x = pos(rng), xi = pos(rng);
      EXPECT_EQ(halfline_kernel(bc, -0.3, x, xi), halfline_kernel(bc, -0.3, xi, x));
      EXPECT_LE(halfline_kernel(bc, -0.3, x, xi), halfline_kernel(bc, -0.1, x, xi));
      EXPECT_GE(halfline_kernel(bc, -0.3, x, xi), 0.0);
    }
}

// ---------------------------------------------------------------------------
// radial kernels

TEST(RadialKernel, ZeroEnergyExamples) {
  const ProblemSpec d2 = ProblemSpec::exterior_ball(2, 1.0, BoundaryCondition::Dirichlet);
  EXPECT_NEAR(radial_kernel(d2, 0.0, 2.0, 3.0), std::log(2.0) / (2.0 * kPi), 1e-13);
  EXPECT_NEAR(std::log(2.0) / (2.0 * kPi), 0.110318, 5e-7);
  // d = 2: beyond rho the solution is constant, so u'(L) = 0 is exact
  const FdSolution fd2 = fd_green(2, 0, 0.0, true, 1.0, 9.0, 3.0, 0.0, 1e-3);
  EXPECT_NEAR(fd2.at(2.0) / (2.0 * kPi), std::log(2.0) / (2.0 * kPi), 1e-6);

  const ProblemSpec d3 = ProblemSpec::exterior_ball(3, 1.0, BoundaryCondition::Dirichlet);
  for (auto [r, rho] : std::vector<std::pair<double, double>>{{1.5, 2.0}, {3.0, 1.2}, {2.0, 2.0}, {5.0, 9.0}}) {
    const double expect = (std::min(r, rho) - 1.0) / (4.0 * kPi * r * rho);
    EXPECT_NEAR(radial_kernel(d3, 0.0, r, rho), expect, 1e-14);
  }
  // d = 3: u = c/r beyond rho, so u' = -u/r at L
  const FdSolution fd3 = fd_green(3, 0, 0.0, true, 1.0, 9.0, 2.0, -1.0 / 10.0, 1e-3);
  EXPECT_NEAR(fd3.at(1.5) / (4.0 * kPi), (1.5 - 1.0) / (4.0 * kPi * 1.5 * 2.0), 1e-6);
  EXPECT_NEAR(radial_kernel(d3, 0.0, 1.0 + 1e-12, 4.0), 0.0, 1e-12);
}

TEST(RadialKernel, NegativeEnergyBvpOracle) {
  for (int d : {2, 3})
    for (auto bc : {BoundaryCondition::Dirichlet, BoundaryCondition::Neumann})
      for (int l : {0, 1, 2}) {
        const double lambda = -0.25;
        const ProblemSpec p = ProblemSpec::exterior_ball(d, 1.0, bc, l);
        const double len = 24.0, rho = 2.0;
        const double kappa = decaying_log_derivative(d, l, lambda, 1.0 + len);
        const FdSolution fd = fd_green(d, l, lambda, bc == BoundaryCondition::Dirichlet, 1.0, len, rho, kappa, 1e-3);
        for (double r : {1.25, 2.0, 3.5}) {
          const double g = radial_kernel(p, lambda, r, rho);
          EXPECT_NEAR(fd.at(r) / sphere_area(d), g, 2e-5 * std::abs(g) + 1e-9) << d << " " << to_string(bc) << " l=" << l;
        }
      }
}

TEST(RadialKernel, SymmetryOnRandomPairs) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> pos(1.0, 6.0);
  for (int d : {1, 2, 3})
    for (auto bc : {BoundaryCondition::Dirichlet, BoundaryCondition::Neumann})
      for (int l : {0, 1, 2}) {
        if (d == 1 && l > 1) continue;
        const ProblemSpec p = ProblemSpec::exterior_ball(d, 1.0, bc, l);
        RadialKernel g(p, -0.04);
        for (int t = 0; t < 50; ++t) {
          const double r = pos(rng), rho = pos(rng);
          EXPECT_NEAR(g(r, rho), g(rho, r), 1e-15 * std::abs(g(r, rho)) + 1e-300);
          EXPECT_GE(g(r, rho), 0.0);
        }
      }
}

TEST(RadialKernel, DefiningEquationResidual) {
  for (int d : {2, 3})
    for (auto bc : {BoundaryCondition::Dirichlet, BoundaryCondition::Neumann})
      for (int l : {0, 2})
        for (double lambda : {-1.0, -1e-3}) {
          const ProblemSpec p = ProblemSpec::exterior_ball(d, 1.0, bc, l);
          RadialKernel g(p, lambda);
          const double rho = 2.0;
          for (double r : {1.4, 3.0}) {
            const double r1 = sl_residual(g, r, rho, 2e-2), r2 = sl_residual(g, r, rho, 1e-2);
            const double scale = std::abs(g(r, rho));
            EXPECT_LT(std::abs(r2), 1e-3 * scale + 1e-12);
            if (std::abs(r1) > 1e-9 * scale) {
              EXPECT_LT(std::abs(r2), 0.35 * std::abs(r1));
            }
          }
          // unit flux jump across the source: -p a omega [G'] = 1
          const double e = 1e-6;
          const double left = (g(rho - e, rho) - g(rho - 2 * e, rho)) / e;
          const double right = (g(rho + 2 * e, rho) - g(rho + e, rho)) / e;
          EXPECT_NEAR(-g.sector().p(rho) * g.sector().omega * (right - left), 1.0, 1e-4);
        }
}

TEST(RadialKernel, MonotoneInLambda) {
  for (int d : {2, 3})
    for (auto bc : {BoundaryCondition::Dirichlet, BoundaryCondition::Neumann}) {
      const ProblemSpec p = ProblemSpec::exterior_ball(d, 1.0, bc, 0);
      RadialKernel lo(p, -1.0), mid(p, -1e-2), hi(p, -1e-4);
      for (double r : {1.2, 2.0, 4.0})
        for (double rho : {1.1, 3.0}) {
          EXPECT_LE(lo(r, rho), mid(r, rho));
          EXPECT_LE(mid(r, rho), hi(r, rho));
        }
      if (bc == BoundaryCondition::Dirichlet || d == 3) {
        RadialKernel zero(p, 0.0);
        EXPECT_LE(hi(2.0, 3.0), zero(2.0, 3.0));
      }
    }
}

TEST(RadialKernel, ZeroEnergyErrors) {
  EXPECT_THROW(radial_kernel(ProblemSpec::exterior_ball(2, 1.0, BoundaryCondition::Neumann), 0.0, 2.0, 3.0),
               DivergentLimitError);
  EXPECT_NO_THROW(radial_kernel(ProblemSpec::exterior_ball(3, 1.0, BoundaryCondition::Neumann), 0.0, 2.0, 3.0));
  EXPECT_THROW(radial_kernel(ProblemSpec::exterior_ball(3, 1.0, BoundaryCondition::Dirichlet), 0.1, 2.0, 3.0),
               DomainError);
  EXPECT_THROW(radial_kernel(ProblemSpec::exterior_ball(3, 1.0, BoundaryCondition::Dirichlet), -1.0, 0.5, 3.0),
               DomainError);
}

TEST(RadialKernel, NumericalPairMatchesClosedForm) {
  for (int d : {1, 2, 3})
    for (auto bc : {BoundaryCondition::Dirichlet, BoundaryCondition::Neumann})
      for (double lambda : {-1.0, -1e-3}) {
        const SectorOperator op = SectorOperator::from(ProblemSpec::exterior_ball(d, 1.0, bc, d == 1 ? 0 : 1), lambda);
        ClosedFormPair exact(op);
        NumericalPair num(op, 6.0);
        for (double r : {1.3, 2.5})
          for (double rho : {1.1, 5.0}) {
            const double g = exact.green(r, rho);
            EXPECT_NEAR(num.green(r, rho), g, 1e-9 * std::abs(g));
          }
      }
}

TEST(RadialKernel, VariableCoefficientAgainstBvp) {
  // a rises linearly from 0.5 at R0 = 1 to 1 at R_a = 2
  const CoefficientProfile a({1.0, 2.0}, {0.5, 1.0});
  for (int d : {2, 3}) {
    const ProblemSpec p = ProblemSpec::exterior_ball(d, 1.0, BoundaryCondition::Dirichlet, 0, a);
    const double lambda = -0.5, rho = 1.6, len = 20.0;
    RadialKernel g(p, lambda, 3.0);
    EXPECT_NEAR(g(1.3, rho), g(rho, 1.3), 1e-12 * g(1.3, rho));
    const FdSolution fd = fd_green(d, 0, lambda, true, 1.0, len, rho, decaying_log_derivative(d, 0, lambda, 1.0 + len),
                                   5e-4, 0.5, 2.0);
    for (double r : {1.3, 1.6, 2.5})
      EXPECT_NEAR(fd.at(r) / sphere_area(d), g(r, rho), 1e-4 * g(r, rho)) << "d=" << d << " r=" << r;
  }
}

// ---------------------------------------------------------------------------
// half-space image kernels

TEST(ImageKernel, QuotedExampleUsesReflectedSource) {
  // y = (1,0,0), sigma = (2,0,0), 2 n x(n) = 20: y - sigma* + shift = (1 + 2 + 20, 0, 0)
  const double core = image_kernel_core(3, ImageSign::Minus, {1, 0, 0}, {2, 0, 0}, 20.0);
  EXPECT_NEAR(core, (1.0 - 1.0 / 23.0) / (4.0 * kPi), 1e-15);
}

TEST(ImageKernel, MatchesImageChargeInOriginalCoordinates) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> ball(-0.55, 0.55);
  const UnitProfile w = UnitProfile::indicator();
  for (int d : {2, 3})
    for (auto sign : {ImageSign::Minus, ImageSign::Plus}) {
      if (d == 2 && sign == ImageSign::Plus) continue;
      for (double n : {3.0, 40.0}) {
        const Point c{1.7 / n, 0.3, -0.2};
        for (int t = 0; t < 20; ++t) {
          Point y{ball(rng), ball(rng), d == 3 ? ball(rng) : 0.0};
          Point s{ball(rng), ball(rng), d == 3 ? ball(rng) : 0.0};
          // original coordinates and the mirror image of the source
          Point x{}, xi{}, mirror{};
          for (int i = 0; i < 3; ++i) {
            x[i] = c[i] + y[i] / n;
            xi[i] = c[i] + s[i] / n;
          }
          mirror = xi;
          mirror[0] = -xi[0];
          const double rd = distance(x, xi, d), ri = distance(x, mirror, d);
          double g = 0.0, h = 0.0;
          if (d == 3) {
            g = (1.0 / rd + (sign == ImageSign::Minus ? -1.0 : 1.0) / ri) / (4.0 * kPi);
            h = n * n;
          } else {
            g = std::log(ri / rd) / (2.0 * kPi);
            h = n * n / std::log(n);
          }
          const double expect = h * std::pow(n, -d) * g; // W = 1 on the ball
          EXPECT_NEAR(halfspace_image_kernel(d, sign, n, c, y, s, w), expect, 1e-12 * std::abs(expect));
        }
      }
    }
}

TEST(ImageKernel, FarImageLimitAndErrors) {
  const UnitProfile w = UnitProfile::indicator();
  const Point y{0.1, 0.2, 0.0}, s{-0.3, 0.1, 0.2};
  const double free = 1.0 / (4.0 * kPi * distance(y, s, 3));
  EXPECT_NEAR(halfspace_image_kernel(3, ImageSign::Minus, 10.0, {1e6, 0, 0}, y, s, w), free, 1e-7 * free);
  EXPECT_THROW(halfspace_image_kernel(2, ImageSign::Plus, 10.0, {1, 0, 0}, y, s, w), DomainError);
  EXPECT_THROW(halfspace_image_kernel(2, ImageSign::Minus, 1.0, {1, 0, 0}, y, s, w), DomainError);
  EXPECT_THROW(halfspace_image_kernel(3, ImageSign::Minus, 2.0, {1, 0, 0}, y, y, w), DomainError);
}

TEST(ImageKernel, TwoDimensionalValuesVanishWithBoundedOffset) {
  const UnitProfile w = UnitProfile::indicator();
  const Point y{0.2, 0.1, 0.0}, s{-0.4, 0.3, 0.0};
  double prev = std::numeric_limits<double>::infinity(), first = 0.0;
  for (double n : {10.0, 1e2, 1e3, 1e4, 1e6}) {
    const double k = halfspace_image_kernel(2, ImageSign::Minus, n, {2.0 / n, 0, 0}, y, s, w);
    EXPECT_LT(k, prev);
    if (n == 10.0) first = k;
    prev = k;
  }
  // the bracket is n-independent here, so the decay is exactly 1/ln n
  EXPECT_NEAR(prev / first, std::log(10.0) / std::log(1e6), 1e-12);
}
