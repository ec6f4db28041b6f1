#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <numbers>

#include "betacrit/closed_form.hpp"
#include "betacrit/model.hpp"
#include "betacrit/quadrature.hpp"
#include "betacrit/radial_ode.hpp"

namespace betacrit {

// Normalization: (H_0 - lambda) G = delta with G >= 0 for lambda < 0.

/// Green function of -d^2/dx^2 - lambda on (0, inf), lambda < 0:
///   (e^{-k|x-xi|} -+ e^{-k(x+xi)}) / (2k),  k = sqrt(|lambda|).
inline double halfline_kernel(BoundaryCondition bc, double lambda, double x, double xi) {
  if (!(lambda < 0.0)) throw DomainError("halfline_kernel: lambda must be negative (use halfline_limit_kernel)");
  if (bc == BoundaryCondition::Fkw) throw DomainError("halfline_kernel: FKW is not a half-line condition");
  const double k = std::sqrt(-lambda);
  const double lo = std::min(x, xi), hi = std::max(x, xi);
  const double near = std::exp(-k * (hi - lo));
  if (bc == BoundaryCondition::Dirichlet) return near * -std::expm1(-2.0 * k * lo) / (2.0 * k);
  return near * (1.0 + std::exp(-2.0 * k * lo)) / (2.0 * k);
}

/// Pointwise lambda -> 0- limit of the Dirichlet half-line kernel: min(x, xi).
inline double halfline_limit_kernel(BoundaryCondition bc, double x, double xi) {
  if (bc != BoundaryCondition::Dirichlet) throw DivergentLimitError();
  return std::min(x, xi);
}

/// Fundamental pair for a sector operator: closed form when the operator is
/// free, RK4-tabulated otherwise (tabulated at least up to r_ext).
inline std::unique_ptr<SectorPair> make_sector_pair(const SectorOperator& op, double r_ext = 0.0) {
  if (op.lambda > 0.0) throw DomainError("Green function requested for lambda > 0");
  if (op.bc == BoundaryCondition::Fkw) throw DomainError("sector operator needs a resolved boundary condition");
  if (op.is_free()) return std::make_unique<ClosedFormPair>(op);
  return std::make_unique<NumericalPair>(op, r_ext);
}

/// Sector Green kernel G_l(r, rho) of H_0 - lambda on the exterior ball (or
/// the half-line), normalized so that u(x) = int G_l(|x|, |xi|) f(xi) dxi for
/// f in sector l; i.e. the Sturm-Liouville Green function divided by |S^{d-1}|.
class RadialKernel {
public:
  RadialKernel(const ProblemSpec& problem, double lambda, double r_ext = 0.0)
      : op_(SectorOperator::from(problem, lambda)), pair_(make_sector_pair(op_, r_ext)) {}

  double operator()(double r, double rho) const { return pair_->green(r, rho) / op_.omega; }
  const SectorOperator& sector() const { return op_; }
  const SectorPair& pair() const { return *pair_; }

private:
  SectorOperator op_;
  std::unique_ptr<SectorPair> pair_;
};

inline double radial_kernel(const ProblemSpec& problem, double lambda, double r, double rho) {
  if (problem.geometry == Geometry::HalfSpace) throw DomainError("radial_kernel: half-space has no radial kernel");
  const double b = problem.boundary();
  if (r < b || rho < b) throw DomainError("radial_kernel: points must lie in the domain");
  return RadialKernel(problem, lambda, std::max(r, rho))(r, rho);
}

// ---------------------------------------------------------------------------
// Half-space image kernels in rescaled coordinates y = (x - x(n)) n.

enum class ImageSign { Minus, Plus };

using quadrature::Point;

inline double distance(const Point& a, const Point& b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

/// y - sigma* + shift, with sigma* the reflection of sigma in the plane y_1 = 0.
inline Point image_offset(const Point& y, const Point& sigma, double shift) {
  return {y[0] + sigma[0] + shift, y[1] - sigma[1], y[2] - sigma[2]};
}

/// Bracket of the image kernel without the sqrt(W) factors and without the
/// 1/ln n of d = 2:
///   d = 3:  (1/4pi) [ |y - sigma|^{-1} -+ |y - sigma* + shift|^{-1} ]
///   d = 2:  (1/2pi) ln( |y - sigma* + shift| / |y - sigma| )   (minus only)
/// shift = 2 n x(n)_1.
inline double image_kernel_core(int d, ImageSign sign, const Point& y, const Point& sigma, double shift) {
  const Point zero{0.0, 0.0, 0.0};
  const double direct = distance(y, sigma, d);
  const double image = distance(image_offset(y, sigma, shift), zero, d);
  if (d == 3) {
    const double c3 = 1.0 / (4.0 * std::numbers::pi);
    return c3 * (1.0 / direct + (sign == ImageSign::Minus ? -1.0 : 1.0) / image);
  }
  if (d == 2) {
    if (sign == ImageSign::Plus) throw DomainError("half-space image kernel: d = 2 supports the Dirichlet (minus) sign only");
    return std::log(image / direct) / (2.0 * std::numbers::pi);
  }
  throw DomainError("half-space image kernel: dimension must be 2 or 3");
}

/// Full rescaled kernel sqrt(W(y)) [bracket] sqrt(W(sigma)); `center` is x(n)
/// in original coordinates (only its normal component enters).
inline double halfspace_image_kernel(int d, ImageSign sign, double n, const Point& center, const Point& y,
                                     const Point& sigma, const UnitProfile& w) {
  if (d == 2 && sign == ImageSign::Plus)
    throw DomainError("half-space image kernel: d = 2 supports the Dirichlet (minus) sign only");
  if (d == 2 && n <= 1.0) throw DomainError("half-space image kernel: d = 2 requires n > 1");
  if (!(center[0] > 0.0)) throw DomainError("half-space image kernel: center must satisfy x_1 > 0");
  if (distance(y, sigma, d) == 0.0) throw DomainError("half-space image kernel: y == sigma is singular");
  const Point zero{0.0, 0.0, 0.0};
  const double wy = w(distance(y, zero, d)), ws = w(distance(sigma, zero, d));
  double value = std::sqrt(wy) * image_kernel_core(d, sign, y, sigma, 2.0 * n * center[0]) * std::sqrt(ws);
  if (d == 2) value /= std::log(n);
  return value;
}

} // namespace betacrit
