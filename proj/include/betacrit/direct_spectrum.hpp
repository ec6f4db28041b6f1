#pragma once

// Direct spectral solves of H_beta = H_0 - beta V in one sector:
//   * eigenvalue counting below 0 on [R0, R_max] by a finite-volume matrix
//     with the exact zero-energy DtN closure and Sturm (LDL^T) inertia,
//   * the ground state by Pruefer-angle shooting with the lambda-dependent
//     DtN closure,
//   * beta_cr by bisection on the count.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "betacrit/birman_schwinger.hpp"
#include "betacrit/closed_form.hpp"
#include "betacrit/numerics.hpp"
#include "betacrit/radial_ode.hpp"

namespace betacrit {

enum class OuterClosure { ZeroEnergyDtN, Dirichlet };

namespace detail {

/// Integral of f over [lo, hi] with 3-point Gauss on pieces split at `breaks`.
template <class F>
double cell_integral(F&& f, double lo, double hi, const std::vector<double>& breaks) {
  static constexpr double x = 0.7745966692414834, w0 = 8.0 / 9.0, w1 = 5.0 / 9.0;
  auto piece = [&](double a, double b) {
    const double m = 0.5 * (a + b), h = 0.5 * (b - a);
    return h * (w0 * f(m) + w1 * (f(m - h * x) + f(m + h * x)));
  };
  double total = 0.0, a = lo;
  for (auto it = std::upper_bound(breaks.begin(), breaks.end(), lo); it != breaks.end() && *it < hi; ++it) {
    total += piece(a, *it);
    a = *it;
  }
  return total + piece(a, hi);
}

/// Number of negative pivots of the symmetric tridiagonal matrix (diag, off).
inline int sturm_negative(const std::vector<double>& diag, const std::vector<double>& off) {
  int neg = 0;
  double d = 1.0;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    d = diag[i] - (i > 0 ? off[i - 1] * off[i - 1] / d : 0.0);
    if (d == 0.0) d = 1e-300;
    if (d < 0.0) ++neg;
  }
  return neg;
}

} // namespace detail

/// Raw count of negative eigenvalues of the finite-volume operator on a
/// uniform mesh of size about h over [R0, r_max]. Lumped cells, cell-averaged
/// potential and centrifugal terms, face-centred stiffness p a / h.
inline int sturm_count(const ProblemSpec& problem, const Potential& potential, double beta, double h, double r_max,
                       OuterClosure closure = OuterClosure::ZeroEnergyDtN) {
  const SectorOperator op = SectorOperator::from(problem, 0.0, potential, beta);
  const double b = op.boundary;
  if (!(r_max > b)) throw DomainError("sturm_count: R_max must exceed the obstacle radius");
  if (closure == OuterClosure::ZeroEnergyDtN && r_max < op.exterior_radius() - 1e-12)
    throw DomainError("sturm_count: the DtN closure needs R_max beyond supp V and the coefficient region");
  const int n = std::max(2, static_cast<int>(std::ceil((r_max - b) / h - 1e-9)));
  const double dh = (r_max - b) / n;
  std::vector<double> breaks = detail::operator_breakpoints(op);
  std::sort(breaks.begin(), breaks.end());
  auto qf = [&](double r) { return op.q(r); };

  const bool dirichlet_in = op.bc == BoundaryCondition::Dirichlet;
  const bool dirichlet_out = closure == OuterClosure::Dirichlet;
  const int first = dirichlet_in ? 1 : 0;
  const int last = dirichlet_out ? n - 1 : n;
  std::vector<double> diag, off;
  diag.reserve(static_cast<std::size_t>(last - first + 1));
  for (int i = first; i <= last; ++i) {
    const double r = b + i * dh;
    const double lo = std::max(b, r - 0.5 * dh), hi = std::min(r_max, r + 0.5 * dh);
    double a = detail::cell_integral(qf, lo, hi, breaks);
    if (i > 0) {
      const double f = r - 0.5 * dh;
      a += op.p(f) * op.a(f) / dh;
    }
    if (i < n) {
      const double f = r + 0.5 * dh;
      const double s = op.p(f) * op.a(f) / dh;
      a += s;
      if (i < last) off.push_back(-s);
    }
    if (i == n) a -= op.p(r_max) * op.a(r_max) * decaying_log_derivative(op.dimension, op.l, 0.0, r_max);
    diag.push_back(a);
  }
  return detail::sturm_negative(diag, off);
}

struct MeshCount {
  double mesh = 0.0;
  double r_max = 0.0;
  int count = 0;
};

struct CountResult {
  int count = 0;
  bool converged = true;
  std::vector<MeshCount> runs;
};

/// R_max ladder: the configured values, or two radii beyond the region
/// where the operator is not free.
inline std::vector<double> r_max_ladder(const ProblemSpec& problem, const Potential& potential, const Numerics& num) {
  if (num.r_max.size() >= 2) return num.r_max;
  const SectorOperator op = SectorOperator::from(problem, 0.0, potential, 1.0);
  const double ext = std::max(op.exterior_radius(), op.boundary);
  const double r1 = num.r_max.empty() ? ext + std::max(1.0, ext - op.boundary) : num.r_max.front();
  return {r1, 2.0 * r1};
}

/// Count on the ladder {h, h/2, h/4} at R_1 and h at R_2; converged when all
/// four agree. The reported count is the finest-mesh value.
inline CountResult count_negative(const ProblemSpec& problem, const Potential& potential, double beta,
                                  const Numerics& num = {}) {
  if (beta < 0.0) throw ValidationError("beta", "must be >= 0");
  require_valid(problem, potential);
  CountResult out;
  if (potential.is_zero() || beta == 0.0) {
    out.runs.push_back({num.mesh, 0.0, 0});
    return out;
  }
  const auto rs = r_max_ladder(problem, potential, num);
  const std::vector<std::pair<double, double>> plan{
      {num.mesh, rs[0]}, {num.mesh / 2, rs[0]}, {num.mesh / 4, rs[0]}, {num.mesh, rs[1]}};
  out.runs.resize(plan.size());
  parallel_for(plan.size(), num.threads, [&](std::size_t i) {
    out.runs[i] = {plan[i].first, plan[i].second,
                   sturm_count(problem, potential, beta, plan[i].first, plan[i].second)};
  });
  out.count = out.runs[2].count;
  for (const auto& r : out.runs) out.converged = out.converged && r.count == out.count;
  return out;
}

// ---------------------------------------------------------------------------
// Pruefer shooting

namespace detail {

inline double pruefer_rhs(const SectorOperator& op, double r, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return c * c / (op.p(r) * op.a(r)) - op.q(r) * s * s;
}

/// Pruefer angle of the boundary solution at r_end (u = rho sin, p a u' = rho cos).
inline double pruefer_angle(const SectorOperator& op, double r_end) {
  const double h_max = std::min((r_end - op.boundary) / 2000.0, 0.01 / std::max(operator_scale(op), 1e-12));
  const auto grid = ode_grid(op.boundary, r_end, operator_breakpoints(op), h_max);
  double theta = op.bc == BoundaryCondition::Dirichlet ? 0.0 : 0.5 * std::numbers::pi;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double r = grid[i], h = grid[i + 1] - grid[i], e = 1e-12 * h;
    const double k1 = pruefer_rhs(op, r + e, theta);
    const double k2 = pruefer_rhs(op, r + 0.5 * h, theta + 0.5 * h * k1);
    const double k3 = pruefer_rhs(op, r + 0.5 * h, theta + 0.5 * h * k2);
    const double k4 = pruefer_rhs(op, r + h - e, theta + h * k3);
    theta += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return theta;
}

/// Angle in (0, pi) of the decaying exterior solution: cot = p sigma.
inline double exterior_angle(const SectorOperator& op, double r_end) {
  return std::atan2(1.0, op.p(r_end) * decaying_log_derivative(op.dimension, op.l, op.lambda, r_end));
}

} // namespace detail

/// Shooting data of H_beta at energy lambda: the number of eigenvalues below
/// lambda and the mismatch angle theta - theta_ext.
struct ShootingState {
  double theta = 0.0;
  double theta_ext = 0.0;
  int below = 0;
};

inline ShootingState shoot(const ProblemSpec& problem, const Potential& potential, double beta, double lambda,
                           double r_end) {
  const SectorOperator op = SectorOperator::from(problem, lambda, potential, beta);
  ShootingState s;
  s.theta = detail::pruefer_angle(op, r_end);
  s.theta_ext = detail::exterior_angle(op, r_end);
  const double diff = s.theta - s.theta_ext;
  s.below = diff >= 0.0 ? static_cast<int>(std::floor(diff / std::numbers::pi)) + 1 : 0;
  return s;
}

struct GroundState {
  double lambda0 = 0.0;
  double residual = 0.0; // |sin(theta - theta_ext)| at lambda0
  double r_end = 0.0;
  std::vector<double> r;
  std::vector<double> u; // normalized to max |u| = 1
};

/// Lowest eigenvalue of H_beta in the problem's sector, or nullopt when there
/// is none. r_end defaults to the radius where the operator becomes free.
inline std::optional<GroundState> ground_state(const ProblemSpec& problem, const Potential& potential, double beta,
                                               double tol = 1e-12, std::optional<double> r_end = std::nullopt) {
  if (!(beta > 0.0)) throw ValidationError("beta", "must be > 0");
  require_valid(problem, potential);
  if (potential.is_zero()) return std::nullopt;
  const SectorOperator free_op = SectorOperator::from(problem, 0.0, potential, beta);
  const double rext = std::max(free_op.exterior_radius(), free_op.boundary + 1e-9);
  const double re = r_end ? *r_end : rext;
  if (re < rext - 1e-12) throw DomainError("ground_state: r_end must lie beyond supp V");

  if (shoot(problem, potential, beta, 0.0, re).below == 0) return std::nullopt;
  double lo = -beta * potential.max_value(), hi = 0.0;
  const ShootingState at_lo = shoot(problem, potential, beta, lo, re);
  if (at_lo.below != 0)
    throw NumericalError("bracket", "ground-state bracket failure: " + std::to_string(at_lo.below) +
                                        " eigenvalues below -beta max V = " + std::to_string(lo));
  for (int it = 0; it < 400 && hi - lo > tol * std::max(std::abs(lo), 1e-300); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (shoot(problem, potential, beta, mid, re).below >= 1)
      hi = mid;
    else
      lo = mid;
  }
  GroundState g;
  g.lambda0 = 0.5 * (lo + hi);
  g.r_end = re;
  const ShootingState s = shoot(problem, potential, beta, g.lambda0, re);
  g.residual = std::abs(std::sin(s.theta - s.theta_ext));
  const NumericalPair pair(SectorOperator::from(problem, g.lambda0, potential, beta), re);
  const int samples = 201;
  double umax = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double r = free_op.boundary + (re - free_op.boundary) * i / (samples - 1);
    g.r.push_back(r);
    g.u.push_back(pair.phi(r));
    umax = std::max(umax, std::abs(g.u.back()));
  }
  for (double& v : g.u) v /= umax;
  return g;
}

// ---------------------------------------------------------------------------
// Birman-Schwinger cross-check

struct CrosscheckRow {
  double beta = 0.0;
  double lambda0 = 0.0;
  double mu0 = 0.0;
  double residual = 0.0; // |beta mu0(lambda0) - 1|
};

inline std::vector<CrosscheckRow> crosscheck_birman_schwinger(const ProblemSpec& problem, const Potential& potential,
                                                              const std::vector<double>& betas,
                                                              const Numerics& num = {}) {
  std::vector<CrosscheckRow> rows;
  if (potential.is_zero()) return rows;
  rows.resize(betas.size());
  Numerics inner = num;
  inner.threads = 1;
  parallel_for(betas.size(), num.threads, [&](std::size_t i) {
    const auto g = ground_state(problem, potential, betas[i]);
    if (!g) throw DomainError("crosscheck: beta = " + std::to_string(betas[i]) + " has no ground state");
    const double mu = principal_eigenvalue(assemble(problem, potential, g->lambda0, inner), num.tol,
                                           num.max_iterations);
    rows[i] = {betas[i], g->lambda0, mu, std::abs(betas[i] * mu - 1.0)};
  });
  return rows;
}

// ---------------------------------------------------------------------------
// beta_cr by bisection on the count

struct DirectLevel {
  double mesh = 0.0;
  double r_max = 0.0;
  double beta = 0.0;
};

struct DirectBeta {
  BetaStatus status = BetaStatus::NoBoundStates;
  double beta_cr = std::numeric_limits<double>::infinity();
  double richardson = std::numeric_limits<double>::quiet_NaN();
  double observed_order = std::numeric_limits<double>::quiet_NaN();
  int sector = 0;
  std::vector<DirectLevel> levels;
  /// Zero status: beta_cr of the Dirichlet-truncated problem on growing
  /// R_max, a sequence decreasing toward 0.
  std::vector<DirectLevel> truncation_sequence;
};

namespace detail {

/// Smallest beta with a negative eigenvalue, or 0 when every beta > 0 has one.
inline double bisect_beta(const ProblemSpec& problem, const Potential& potential, double h, double r_max,
                          OuterClosure closure, double tol) {
  auto bound = [&](double beta) { return sturm_count(problem, potential, beta, h, r_max, closure) >= 1; };
  double hi = 1.0 / potential.max_value();
  int guard = 0;
  while (!bound(hi)) {
    hi *= 2.0;
    if (++guard > 80) throw NumericalError("bracket", "no bound state found for beta up to " + std::to_string(hi));
  }
  // below this the count is at the rounding level of the LDL^T pivots
  const double floor = 1e-8 * hi;
  double lo = 0.0;
  while (hi - lo > tol * hi) {
    if (hi < floor) return 0.0;
    const double mid = 0.5 * (lo + hi);
    if (bound(mid))
      hi = mid;
    else
      lo = mid;
  }
  const double beta = 0.5 * (lo + hi);
  return beta < floor ? 0.0 : beta;
}

} // namespace detail

/// beta_cr = min over sectors of the count threshold, on the ladder
/// (h, R_1), (h/2, R_1), (h/4, R_1), (h, R_2) with Richardson in h.
inline DirectBeta beta_critical_direct(const ProblemSpec& problem, const Potential& potential,
                                       const Numerics& num = {}) {
  num.check();
  require_valid(problem, potential);
  DirectBeta out;
  if (potential.is_zero()) return out;
  const double tol = num.bisection_tol;
  for (int l : sector_list(problem, num.max_sector)) {
    const ProblemSpec p = problem.with_sector(l);
    const auto rs = r_max_ladder(p, potential, num);
    const std::vector<std::pair<double, double>> plan{
        {num.mesh, rs[0]}, {num.mesh / 2, rs[0]}, {num.mesh / 4, rs[0]}, {num.mesh, rs[1]}};
    std::vector<DirectLevel> levels(plan.size());
    parallel_for(plan.size(), num.threads, [&](std::size_t i) {
      levels[i] = {plan[i].first, plan[i].second,
                   detail::bisect_beta(p, potential, plan[i].first, plan[i].second, OuterClosure::ZeroEnergyDtN, tol)};
    });
    const double b1 = levels[0].beta, b2 = levels[1].beta, b4 = levels[2].beta, bR = levels[3].beta;
    const double scale = std::max({b1, b2, b4, bR});
    if (std::abs(b1 - bR) > 1e-6 * scale + 1e-14)
      throw NumericalError("unconverged", "sector " + std::to_string(l) + ": beta_cr depends on R_max (" +
                                              std::to_string(b1) + " vs " + std::to_string(bR) + ")");
    const double rich = b4 + (b4 - b2) / 3.0;
    const bool first = out.levels.empty();
    if (first || rich < out.beta_cr) {
      out.beta_cr = rich;
      out.richardson = rich;
      out.sector = l;
      out.levels = levels;
      const double d1 = b1 - b2, d2 = b2 - b4;
      out.observed_order = (d1 != 0.0 && d2 != 0.0) ? std::log2(std::abs(d1 / d2)) : std::numeric_limits<double>::quiet_NaN();
    }
  }
  if (out.beta_cr <= 0.0) {
    out.status = BetaStatus::Zero;
    out.beta_cr = 0.0;
    const ProblemSpec p = problem.with_sector(out.sector);
    const double r1 = r_max_ladder(p, potential, num).front();
    for (int j = 0; j < 5; ++j) {
      const double r = r1 * std::pow(4.0, j);
      const double h = std::max(num.mesh, r / 20000.0);
      out.truncation_sequence.push_back({h, r, detail::bisect_beta(p, potential, h, r, OuterClosure::Dirichlet, 1e-6)});
    }
  } else {
    out.status = BetaStatus::Positive;
  }
  return out;
}

} // namespace betacrit
