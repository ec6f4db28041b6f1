#pragma once

// FKW condition on the exterior ball with the uniform measure:
//   u|_{r=R0} = const,   int_{r=R0} du/dn dmu = 0.
// Sector 0 is solved through u = alpha v + R_{lambda,D} f with v the
// decaying solution normalized by v(R0) = 1; sectors l >= 1 are plain
// Dirichlet solves. Fluxes use the derivative d/dr at R0, and
// gamma1 = -v'(R0), which is positive below the spectrum.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "betacrit/birman_schwinger.hpp"
#include "betacrit/direct_spectrum.hpp"
#include "betacrit/green_kernels.hpp"
#include "betacrit/quadrature.hpp"

namespace betacrit {

namespace detail {

inline void require_fkw_geometry(const ProblemSpec& problem) {
  if (problem.geometry != Geometry::ExteriorBall)
    throw ValidationError("problem.geometry", "FKW condition requires the exterior-ball geometry");
}

inline SectorOperator fkw_sector(const ProblemSpec& problem, int l, BoundaryCondition bc, double lambda,
                                 const Potential& potential, double beta) {
  SectorOperator op = SectorOperator::from(problem.with_sector(l), lambda, potential, beta);
  op.bc = bc;
  return op;
}

} // namespace detail

/// Decaying sector-0 solution of -(p a v')' + p(-beta V - lambda) v = 0 with v(R0) = 1.
class AuxiliarySolution {
public:
  /// Tabulated at least up to r_min when the operator is not free.
  AuxiliarySolution(const ProblemSpec& problem, double beta, const Potential& potential, double lambda,
                    double r_min = 0.0) {
    detail::require_fkw_geometry(problem);
    if (lambda > 0.0) throw DomainError("solve_v: lambda must be <= 0");
    const SectorOperator op = detail::fkw_sector(problem, 0, BoundaryCondition::Dirichlet, lambda, potential, beta);
    r0_ = op.boundary;
    const double r_ext = std::max(std::max(op.exterior_radius(), r0_) + 1.0, r_min);
    if (op.is_free()) {
      pair_ = std::make_unique<ClosedFormPair>(op);
      free_ = true;
    } else {
      pair_ = std::make_unique<NumericalPair>(op, r_ext);
    }
    psi0_ = pair_->psi(r0_);
    const double scale = std::abs(pair_->psi(r_ext)) + std::abs(psi0_);
    if (!(std::abs(psi0_) > 1e-10 * scale))
      throw NumericalError("resolvent-singular", "lambda is at a Dirichlet eigenvalue: the decaying solution vanishes at R0");
    dpsi0_ = pair_->dpsi(r0_);
    r_tab_ = free_ ? std::numeric_limits<double>::infinity() : r_ext;
  }

  double operator()(double r) const { return pair_->psi(check(r)) / psi0_; }
  double derivative(double r) const { return pair_->dpsi(check(r)) / psi0_; }
  /// Flux constant gamma1 = -v'(R0) (uniform probability measure on the sphere).
  double gamma1() const { return -dpsi0_ / psi0_; }
  double boundary() const { return r0_; }

private:
  double check(double r) const {
    if (r < r0_ - 1e-12 || r > r_tab_) throw DomainError("auxiliary solution evaluated outside its range");
    return r;
  }

  std::unique_ptr<SectorPair> pair_;
  double r0_ = 0.0;
  double psi0_ = 1.0;
  double dpsi0_ = 0.0;
  double r_tab_ = 0.0;
  bool free_ = false;
};

inline AuxiliarySolution solve_v(const ProblemSpec& problem, double beta, const Potential& potential, double lambda) {
  return AuxiliarySolution(problem, beta, potential, lambda);
}

inline double gamma1(const ProblemSpec& problem, double beta, const Potential& potential, double lambda) {
  return solve_v(problem, beta, potential, lambda).gamma1();
}

/// Source restricted to one angular sector: radial profile f_l(r) on [lo, hi].
struct SectorSource {
  int sector = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::function<double(double)> profile;
};

struct SectorProfile {
  int sector = 0;
  std::vector<double> r;
  std::vector<double> u;
};

class FkwSolution {
public:
  double alpha = 0.0;
  double gamma = 0.0;
  double gamma1 = 0.0;
  std::vector<SectorProfile> sector_profiles;

  /// Sector component u_l(r).
  double u(int l, double r) const {
    double total = 0.0;
    for (const auto& s : parts_)
      if (s.source.sector == l) total += resolvent(s, r);
    if (l == 0 && alpha != 0.0) total += alpha * (*v_)(r);
    return total;
  }

  /// d/dr of u_l at the obstacle, from the kernel's normal derivative.
  double boundary_flux(int l) const {
    double total = 0.0;
    for (const auto& s : parts_)
      if (s.source.sector == l) total += resolvent_flux(s);
    if (l == 0) total += alpha * v_->derivative(v_->boundary());
    return total;
  }

private:
  friend FkwSolution solve_fkw(const ProblemSpec&, double, const Potential&, double, const std::vector<SectorSource>&,
                               int);
  struct Part {
    SectorSource source;
    std::shared_ptr<SectorPair> pair;
    SectorOperator op;
    quadrature::Rule rule;
  };

  static double resolvent(const Part& s, double r) {
    // split the source integral at the kink rho = r
    double total = 0.0;
    const double cut[] = {r};
    const auto rule = (r > s.source.lo && r < s.source.hi)
                          ? quadrature::composite(s.source.lo, s.source.hi, static_cast<int>(s.rule.size()), cut)
                          : s.rule;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double rho = rule.nodes[i];
      total += rule.weights[i] * s.op.p(rho) * s.pair->green(r, rho) * s.source.profile(rho);
    }
    return total;
  }

  static double resolvent_flux(const Part& s) {
    double total = 0.0;
    for (std::size_t i = 0; i < s.rule.size(); ++i) {
      const double rho = s.rule.nodes[i];
      total += s.rule.weights[i] * s.op.p(rho) * s.pair->green_normal_derivative(s.op.boundary, rho) *
               s.source.profile(rho);
    }
    return total;
  }

  std::vector<Part> parts_;
  std::shared_ptr<AuxiliarySolution> v_;
};

/// u = alpha v + R_{lambda,D} f with alpha = -gamma / gamma1 and
/// gamma = -d/dr (R_{lambda,D} f_0)(R0); sectors l >= 1 take alpha = 0.
inline FkwSolution solve_fkw(const ProblemSpec& problem, double beta, const Potential& potential, double lambda,
                             const std::vector<SectorSource>& sources, int m = 400) {
  detail::require_fkw_geometry(problem);
  require_valid(problem, potential);
  if (!(lambda < 0.0)) throw DomainError("solve_fkw: lambda must be negative");
  FkwSolution sol;
  const double b = problem.boundary();
  double r_out = std::max(b, potential.is_zero() ? b : potential.hi());
  for (const auto& src : sources) {
    if (problem.dimension == 1 && src.sector > 1)
      throw ValidationError("source.sector", "d = 1 has sectors 0 (even) and 1 (odd) only");
    if (src.sector < 0) throw ValidationError("source.sector", "must be >= 0");
    if (!(src.hi > src.lo) || src.lo < b) throw ValidationError("source.support", "need R0 <= lo < hi");
    r_out = std::max(r_out, src.hi);
  }
  r_out += 1.0;
  sol.v_ = std::make_shared<AuxiliarySolution>(problem, beta, potential, lambda, r_out);
  sol.gamma1 = sol.v_->gamma1();
  for (const auto& src : sources) {
    FkwSolution::Part part;
    part.source = src;
    part.op = detail::fkw_sector(problem, src.sector, BoundaryCondition::Dirichlet, lambda, potential, beta);
    part.pair = std::shared_ptr<SectorPair>(make_sector_pair(part.op, r_out));
    part.rule = quadrature::composite(src.lo, src.hi, m);
    sol.parts_.push_back(std::move(part));
  }
  double flux0 = 0.0;
  for (const auto& p : sol.parts_)
    if (p.source.sector == 0) flux0 += FkwSolution::resolvent_flux(p);
  sol.gamma = -flux0;
  const bool has_radial = flux0 != 0.0;
  if (has_radial && !(std::abs(sol.gamma1) > 1e-12))
    throw NumericalError("near-singular", "gamma1 vanishes: lambda is close to an FKW eigenvalue");
  sol.alpha = has_radial ? -sol.gamma / sol.gamma1 : 0.0;

  std::vector<int> sectors{0};
  for (const auto& s : sources)
    if (std::find(sectors.begin(), sectors.end(), s.sector) == sectors.end()) sectors.push_back(s.sector);
  std::sort(sectors.begin(), sectors.end());
  const int samples = 101;
  for (int l : sectors) {
    SectorProfile prof;
    prof.sector = l;
    for (int i = 0; i < samples; ++i) {
      const double r = b + (r_out - b) * i / (samples - 1);
      prof.r.push_back(r);
      prof.u.push_back(sol.u(l, r));
    }
    sol.sector_profiles.push_back(std::move(prof));
  }
  return sol;
}

/// Sector-0 FKW kernel built from the decomposition,
///   G_D(r, rho) + v(r) d/dr G_D(R0, rho) / gamma1,
/// normalized like radial_kernel.
inline double fkw_sector0_kernel(const ProblemSpec& problem, double lambda, double r, double rho) {
  detail::require_fkw_geometry(problem);
  const AuxiliarySolution v(problem, 0.0, Potential::zero(), lambda);
  const SectorOperator op = detail::fkw_sector(problem, 0, BoundaryCondition::Dirichlet, lambda, Potential::zero(), 0.0);
  const auto pair = make_sector_pair(op, std::max(r, rho));
  const double gd = pair->green(r, rho);
  const double dg = pair->green_normal_derivative(op.boundary, rho);
  return (gd + v(r) * dg / v.gamma1()) / op.omega;
}

// ---------------------------------------------------------------------------
// lambda -> 0- behaviour and beta_cr

struct FkwNormLimit {
  LimitKind kind = LimitKind::Bounded;
  std::vector<MuCurve> curves;        // one per sector
  std::vector<LimitVerdict> verdicts; // one per sector
  std::vector<double> gamma1;         // gamma1(lambda_j) at beta = 0
};

inline FkwNormLimit fkw_norm_limit(const ProblemSpec& problem, const Potential& potential,
                                   const std::vector<double>& grid, const Numerics& num = {}) {
  detail::require_fkw_geometry(problem);
  const ProblemSpec p = problem.with_bc(BoundaryCondition::Fkw);
  FkwNormLimit out;
  for (double lam : grid) out.gamma1.push_back(gamma1(p, 0.0, Potential::zero(), lam));
  if (potential.is_zero()) return out;
  bool all_bounded = true;
  for (int l : sector_list(p, num.max_sector)) {
    out.curves.push_back(mu_curve(p.with_sector(l), potential, grid, num));
    out.verdicts.push_back(classify_limit(out.curves.back().samples, num));
    const LimitKind k = out.verdicts.back().kind;
    if (k == LimitKind::Divergent) out.kind = LimitKind::Divergent;
    all_bounded = all_bounded && k == LimitKind::Bounded;
  }
  if (out.kind != LimitKind::Divergent && !all_bounded) out.kind = LimitKind::Indeterminate;
  return out;
}

struct FkwBeta {
  BetaStatus status = BetaStatus::NoBoundStates;
  double beta_cr = std::numeric_limits<double>::infinity();
  BetaCritical birman_schwinger;
  DirectBeta direct;
};

/// beta_cr of the FKW problem by the Birman-Schwinger route, confirmed by a
/// direct sweep (sector 0 Neumann, sectors l >= 1 Dirichlet).
inline FkwBeta beta_critical_fkw(const ProblemSpec& problem, const Potential& potential, const Numerics& num = {}) {
  detail::require_fkw_geometry(problem);
  const ProblemSpec p = problem.with_bc(BoundaryCondition::Fkw);
  FkwBeta out;
  if (potential.is_zero()) return out;
  out.birman_schwinger = beta_critical(p, potential, BetaMethod::Auto, num);
  out.direct = beta_critical_direct(p, potential, num);
  const double a = out.birman_schwinger.beta_cr, d = out.direct.beta_cr;
  const bool agree = out.birman_schwinger.status == out.direct.status &&
                     (out.direct.status != BetaStatus::Positive || std::abs(a - d) <= 1e-3 * d);
  if (!agree)
    throw NumericalError("inconsistent", "FKW beta_cr: Birman-Schwinger " + std::to_string(a) + " (" +
                                             to_string(out.birman_schwinger.status) + ") vs direct " +
                                             std::to_string(d) + " (" + to_string(out.direct.status) + ")");
  out.status = out.birman_schwinger.status;
  out.beta_cr = a;
  return out;
}

} // namespace betacrit
