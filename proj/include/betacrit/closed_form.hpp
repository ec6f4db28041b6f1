#pragma once

// Closed-form fundamental pairs of the free sector operator (a = 1, V = 0):
//   d = 1:      exponentials in x = r - R0,
//   d = 2, 3:   r^{-s} I_nu(kr), r^{-s} K_nu(kr), s = (d-2)/2, nu = l + s,
//   lambda = 0: the power (or logarithm) limits of the above.
// Values are carried as phi = phi_hat e^{k t}, psi = psi_hat e^{-k t} with
// t = r - R0 so that phi(r) psi(rho) never overflows.

#include <cmath>
#include <utility>

#include "betacrit/bessel.hpp"
#include "betacrit/sector.hpp"

namespace betacrit {

class ClosedFormPair final : public SectorPair {
public:
  explicit ClosedFormPair(const SectorOperator& op)
      : d_(op.dimension), r0_(op.boundary), l_(op.l), bc_(op.bc) {
    if (op.lambda > 0.0) throw DomainError("Green function requested for lambda > 0");
    if (!op.is_free()) throw DomainError("closed-form pair needs a = 1 and V = 0");
    if (op.zero_energy_divergent()) throw DivergentLimitError();
    k_ = std::sqrt(-op.lambda);
    s_ = 0.5 * (d_ - 2);
    nu_ = l_ + s_;
    if (d_ == 1) {
      c_ = (k_ > 0.0 && bc_ == BoundaryCondition::Neumann) ? k_ : 1.0;
      return;
    }
    if (k_ > 0.0) {
      const double c = k_ * r0_;
      const auto b = bessel::scaled(nu_, c);
      if (bc_ == BoundaryCondition::Dirichlet) {
        ratio_ = b.i_nu / b.k_nu;
      } else {
        const double di = k_ * b.di_nu(nu_, c) - s_ / r0_ * b.i_nu;
        const double dk = k_ * b.dk_nu(nu_, c) - s_ / r0_ * b.k_nu;
        ratio_ = di / dk;
      }
      c_ = 1.0;
    } else {
      m_ = l_ + d_ - 2;
      if (m_ == 0) {
        c_ = 1.0;
      } else {
        kappa_ = bc_ == BoundaryCondition::Dirichlet ? 1.0 : -static_cast<double>(l_) / m_;
        c_ = l_ + m_;
      }
    }
  }

  double rate() const override { return k_; }

  /// phi_hat(r), psi_hat(r) with phi = phi_hat e^{k(r-R0)}, psi = psi_hat e^{-k(r-R0)}.
  std::pair<double, double> factors(double r) const override {
    const double t = r - r0_;
    if (d_ == 1) {
      if (k_ == 0.0) return {t, 1.0};
      if (bc_ == BoundaryCondition::Dirichlet) return {-std::expm1(-2.0 * k_ * t) / (2.0 * k_), 1.0};
      return {0.5 * (1.0 + std::exp(-2.0 * k_ * t)), 1.0};
    }
    if (k_ == 0.0) {
      if (m_ == 0) return {std::log(r / r0_), 1.0};
      return {std::pow(r, l_) - kappa_ * std::pow(r0_, l_ + m_) * std::pow(r, -m_), std::pow(r, -m_)};
    }
    const double z = k_ * r, c = k_ * r0_;
    const auto b = bessel::scaled(nu_, z);
    const double rs = std::pow(r, -s_);
    const double ph = rs * (b.i_nu - ratio_ * b.k_nu * std::exp(2.0 * c - 2.0 * z)) * std::exp(c);
    const double ps = rs * b.k_nu * std::exp(-c);
    return {ph, ps};
  }

  double phi(double r) const override { return factors(r).first * std::exp(k_ * (r - r0_)); }
  double psi(double r) const override { return factors(r).second * std::exp(-k_ * (r - r0_)); }

  double dphi(double r) const override {
    const double t = r - r0_;
    if (d_ == 1) {
      if (k_ == 0.0) return 1.0;
      return bc_ == BoundaryCondition::Dirichlet ? std::cosh(k_ * t) : k_ * std::sinh(k_ * t);
    }
    if (k_ == 0.0) {
      if (m_ == 0) return 1.0 / r;
      return l_ * std::pow(r, l_ - 1) + kappa_ * m_ * std::pow(r0_, l_ + m_) * std::pow(r, -m_ - 1);
    }
    const double z = k_ * r, c = k_ * r0_;
    const auto b = bessel::scaled(nu_, z);
    const double bracket = b.di_nu(nu_, z) - ratio_ * b.dk_nu(nu_, z) * std::exp(2.0 * c - 2.0 * z);
    return -s_ / r * phi(r) + std::pow(r, -s_) * k_ * std::exp(k_ * t + c) * bracket;
  }

  double dpsi(double r) const override {
    const double t = r - r0_;
    if (d_ == 1) return -k_ * std::exp(-k_ * t);
    if (k_ == 0.0) return m_ == 0 ? 0.0 : -m_ * std::pow(r, -m_ - 1);
    const double z = k_ * r, c = k_ * r0_;
    const auto b = bessel::scaled(nu_, z);
    return -s_ / r * psi(r) + std::pow(r, -s_) * k_ * b.dk_nu(nu_, z) * std::exp(-k_ * t - c);
  }

  double wronskian() const override { return c_; }

private:
  int d_;
  double r0_;
  int l_;
  BoundaryCondition bc_;
  double k_ = 0.0;
  double s_ = 0.0;
  double nu_ = 0.0;
  double ratio_ = 0.0; // scaled I/K ratio fixing the inner boundary condition
  double c_ = 1.0;
  int m_ = 0;
  double kappa_ = 1.0;
};

/// Logarithmic derivative psi'/psi of the decaying free solution at radius r
/// (the exact Dirichlet-to-Neumann coefficient of sector l).
inline double decaying_log_derivative(int d, int l, double lambda, double r) {
  if (lambda > 0.0) throw DomainError("DtN coefficient requested for lambda > 0");
  const double k = std::sqrt(-lambda);
  if (d == 1) return -k;
  const int m = l + d - 2;
  if (k == 0.0) return -static_cast<double>(m) / r;
  const double s = 0.5 * (d - 2), nu = l + s, z = k * r;
  const auto b = bessel::scaled(nu, z);
  return -s / r + k * b.dk_nu(nu, z) / b.k_nu;
}

} // namespace betacrit
