#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "betacrit/model.hpp"

namespace betacrit {

/// One angular sector of H_0 - beta V - lambda on r > boundary:
///   -(p a u')' + p (a L / r^2 - beta V - lambda) u,  p = r^{d-1},
/// with L = l (l + d - 2). On the half-line (and for d = 1 generally) p = 1
/// and L = 0.
struct SectorOperator {
  int dimension = 1;
  double boundary = 0.0;
  /// Angular measure: 1 on the half-line, |S^{d-1}| on the exterior ball.
  double omega = 1.0;
  CoefficientProfile coefficient{};
  BoundaryCondition bc = BoundaryCondition::Dirichlet; // Dirichlet or Neumann only
  int l = 0;
  double lambda = 0.0;
  Potential potential{};
  double beta = 0.0;

  /// Boundary condition seen by sector l. The FKW condition with the
  /// uniform measure is Neumann in sector 0 and Dirichlet in all others.
  static BoundaryCondition sector_bc(BoundaryCondition bc, int l) {
    if (bc == BoundaryCondition::Fkw) return l == 0 ? BoundaryCondition::Neumann : BoundaryCondition::Dirichlet;
    return bc;
  }

  static SectorOperator from(const ProblemSpec& problem, double lambda, Potential potential = {},
                             double beta = 0.0) {
    SectorOperator op;
    op.dimension = problem.dimension;
    op.boundary = problem.boundary();
    op.omega = problem.geometry == Geometry::ExteriorBall ? sphere_area(problem.dimension) : 1.0;
    op.coefficient = problem.coefficient;
    op.bc = sector_bc(problem.bc, problem.sector);
    op.l = problem.dimension == 1 ? 0 : problem.sector;
    op.lambda = lambda;
    op.potential = std::move(potential);
    op.beta = beta;
    return op;
  }

  double p(double r) const { return dimension == 1 ? 1.0 : std::pow(r, dimension - 1); }
  double a(double r) const { return coefficient(r); }
  double centrifugal() const { return dimension == 1 ? 0.0 : static_cast<double>(l) * (l + dimension - 2); }

  /// Zeroth-order coefficient: P' = q(r) u with P = p a u'.
  double q(double r) const {
    const double c = centrifugal();
    return p(r) * ((c > 0.0 ? a(r) * c / (r * r) : 0.0) - beta * potential(r) - lambda);
  }

  bool has_potential() const { return beta != 0.0 && !potential.is_zero(); }
  bool is_free() const { return coefficient.is_identity() && !has_potential(); }

  /// Radius beyond which the operator is the free one (a = 1, V = 0).
  double exterior_radius() const {
    double r = boundary;
    if (!coefficient.is_identity()) r = std::max(r, coefficient.stabilization_radius());
    if (has_potential()) r = std::max(r, potential.hi());
    return r;
  }

  /// Zero-energy Green function does not exist: recurrent sector.
  bool zero_energy_divergent() const {
    return lambda == 0.0 && bc == BoundaryCondition::Neumann && l == 0 && dimension <= 2;
  }
};

/// Fundamental pair of one sector operator: phi satisfies the boundary
/// condition at the obstacle, psi decays (or stays bounded at lambda = 0)
/// at infinity, and C = p a (phi' psi - phi psi') is constant.
class SectorPair {
public:
  virtual ~SectorPair() = default;
  virtual double phi(double r) const = 0;
  virtual double dphi(double r) const = 0;
  virtual double psi(double r) const = 0;
  virtual double dpsi(double r) const = 0;
  virtual double wronskian() const = 0;

  /// Exponent k and factors (phi_hat, psi_hat) with phi = phi_hat e^{k r},
  /// psi = psi_hat e^{-k r} up to a common constant; the default is k = 0.
  virtual double rate() const { return 0.0; }
  virtual std::pair<double, double> factors(double r) const { return {phi(r), psi(r)}; }

  /// Sturm-Liouville Green function phi(min) psi(max) / C.
  double green(double r, double rho) const {
    const double lo = std::min(r, rho), hi = std::max(r, rho);
    return factors(lo).first * factors(hi).second * std::exp(rate() * (lo - hi)) / wronskian();
  }

  /// d/dr of green(r, rho) at r = boundary (rho inside the domain).
  virtual double green_normal_derivative(double boundary, double rho) const {
    return dphi(boundary) * psi(rho) / wronskian();
  }
};

} // namespace betacrit
