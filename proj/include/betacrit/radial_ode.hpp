#pragma once

// Numerical fundamental pair for sector operators with a variable
// coefficient a(r) and/or a potential term. The boundary solution phi is
// integrated outward from the obstacle, the decaying solution psi inward from
// the exterior radius where the closed-form free solution takes over. Both
// are stored on an RK4 grid aligned with every breakpoint of a and V and
// evaluated by cubic Hermite interpolation.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "betacrit/closed_form.hpp"

namespace betacrit {

namespace detail {

/// State (u, P) with P = p a u'.
using OdeState = std::array<double, 2>;

inline OdeState sector_rhs(const SectorOperator& op, double r, const OdeState& y) {
  return {y[1] / (op.p(r) * op.a(r)), op.q(r) * y[0]};
}

/// One RK4 step of length h (h may be negative). The potential is sampled
/// at r + h/2 from the interior, so steps must not straddle breakpoints.
inline OdeState rk4_step(const SectorOperator& op, double r, const OdeState& y, double h) {
  auto axpy = [](const OdeState& a, double s, const OdeState& b) {
    return OdeState{a[0] + s * b[0], a[1] + s * b[1]};
  };
  const double eps = 1e-12 * std::abs(h);
  const double r_in = r + (h > 0 ? eps : -eps), r_out = r + h - (h > 0 ? eps : -eps);
  const OdeState k1 = sector_rhs(op, r_in, y);
  const OdeState k2 = sector_rhs(op, r + 0.5 * h, axpy(y, 0.5 * h, k1));
  const OdeState k3 = sector_rhs(op, r + 0.5 * h, axpy(y, 0.5 * h, k2));
  const OdeState k4 = sector_rhs(op, r_out, axpy(y, h, k3));
  return {y[0] + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
          y[1] + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
}

/// Integration grid on [lo, hi]: every breakpoint is a node, steps <= h_max.
inline std::vector<double> ode_grid(double lo, double hi, std::vector<double> breaks, double h_max) {
  breaks.push_back(lo);
  breaks.push_back(hi);
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> cuts;
  for (double b : breaks)
    if (b >= lo && b <= hi && (cuts.empty() || b - cuts.back() > 1e-12 * (hi - lo))) cuts.push_back(b);
  if (cuts.back() < hi) cuts.push_back(hi);
  cuts.back() = hi;
  std::vector<double> grid{cuts.front()};
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const int n = std::max(1, static_cast<int>(std::ceil((cuts[i + 1] - cuts[i]) / h_max)));
    for (int j = 1; j <= n; ++j) grid.push_back(cuts[i] + (cuts[i + 1] - cuts[i]) * j / n);
  }
  return grid;
}

inline std::vector<double> operator_breakpoints(const SectorOperator& op) {
  std::vector<double> out(op.coefficient.knots().begin(), op.coefficient.knots().end());
  if (op.has_potential()) {
    const auto k = op.potential.knots();
    out.insert(out.end(), k.begin(), k.end());
  }
  return out;
}

/// Local wavenumber scale used to choose RK4 steps.
inline double operator_scale(const SectorOperator& op) {
  double s = std::abs(op.lambda) + std::abs(op.beta) * op.potential.max_value();
  if (op.centrifugal() > 0.0 && op.boundary > 0.0) s += op.centrifugal() / (op.boundary * op.boundary);
  return std::sqrt(s / std::max(op.coefficient.min_value(), 1e-300));
}

} // namespace detail

class NumericalPair final : public SectorPair {
public:
  /// r_ext: radius up to which the pair is tabulated (at least the radius
  /// where the operator becomes free).
  explicit NumericalPair(const SectorOperator& op, double r_ext = 0.0) : op_(op) {
    if (op.lambda > 0.0) throw DomainError("Green function requested for lambda > 0");
    if (op.zero_energy_divergent() && !op.has_potential()) throw DivergentLimitError();
    const double lo = op.boundary;
    double hi = std::max(op.exterior_radius(), r_ext);
    if (!(hi > lo)) hi = lo + 1.0;
    const double span = hi - lo;
    const double h_max = std::min(span / 2000.0, 0.01 / std::max(detail::operator_scale(op), 1e-12));
    grid_ = detail::ode_grid(lo, hi, detail::operator_breakpoints(op), h_max);
    const std::size_t n = grid_.size();

    phi_.resize(n);
    phi_[0] = op.bc == BoundaryCondition::Dirichlet ? detail::OdeState{0.0, 1.0} : detail::OdeState{1.0, 0.0};
    for (std::size_t i = 0; i + 1 < n; ++i)
      phi_[i + 1] = detail::rk4_step(op_, grid_[i], phi_[i], grid_[i + 1] - grid_[i]);

    // decaying free solution at the outer end (scale irrelevant)
    psi_.resize(n);
    const double sigma = decaying_log_derivative(op.dimension, op.l, op.lambda, hi);
    psi_[n - 1] = {1.0, op.p(hi) * sigma};
    for (std::size_t i = n - 1; i > 0; --i)
      psi_[i - 1] = detail::rk4_step(op_, grid_[i], psi_[i], grid_[i - 1] - grid_[i]);

    const auto& f = phi_.back();
    const auto& g = psi_.back();
    c_ = f[1] * g[0] - f[0] * g[1];
    scale_ = std::abs(f[1] * g[0]) + std::abs(f[0] * g[1]);
  }

  double outer_radius() const { return grid_.back(); }
  /// |C| relative to the size of its two terms; ~0 at a Dirichlet eigenvalue.
  double relative_wronskian() const { return scale_ > 0.0 ? std::abs(c_) / scale_ : 0.0; }

  double phi(double r) const override { return eval(phi_, r, false); }
  double dphi(double r) const override { return eval(phi_, r, true); }
  double psi(double r) const override { return eval(psi_, r, false); }
  double dpsi(double r) const override { return eval(psi_, r, true); }
  double wronskian() const override { return c_; }

  /// Flux P = p a u' of phi and psi at a grid-aligned radius.
  double phi_flux(double r) const { return dphi(r) * op_.p(r) * op_.a(r); }
  double psi_flux(double r) const { return dpsi(r) * op_.p(r) * op_.a(r); }

private:
  double eval(const std::vector<detail::OdeState>& tab, double r, bool derivative) const {
    if (r < grid_.front() - 1e-12 || r > grid_.back() + 1e-9 * (1.0 + grid_.back()))
      throw DomainError("numerical pair evaluated outside its tabulated range");
    r = std::clamp(r, grid_.front(), grid_.back());
    auto it = std::upper_bound(grid_.begin(), grid_.end(), r);
    std::size_t i = static_cast<std::size_t>(it - grid_.begin());
    i = i == 0 ? 0 : i - 1;
    if (i + 1 >= grid_.size()) i = grid_.size() - 2;
    const double r0 = grid_[i], r1 = grid_[i + 1], h = r1 - r0;
    const double eps = 1e-12 * h;
    const double d0 = tab[i][1] / (op_.p(r0) * op_.a(r0 + eps));
    const double d1 = tab[i + 1][1] / (op_.p(r1) * op_.a(r1 - eps));
    const double t = (r - r0) / h;
    const double u0 = tab[i][0], u1 = tab[i + 1][0];
    if (!derivative) {
      const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
      const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
      return h00 * u0 + h10 * h * d0 + h01 * u1 + h11 * h * d1;
    }
    const double g00 = 6 * t * t - 6 * t, g10 = 3 * t * t - 4 * t + 1;
    const double g01 = -6 * t * t + 6 * t, g11 = 3 * t * t - 2 * t;
    return (g00 * u0 + g01 * u1) / h + g10 * d0 + g11 * d1;
  }

  SectorOperator op_;
  std::vector<double> grid_;
  std::vector<detail::OdeState> phi_;
  std::vector<detail::OdeState> psi_;
  double c_ = 0.0;
  double scale_ = 0.0;
};

} // namespace betacrit
