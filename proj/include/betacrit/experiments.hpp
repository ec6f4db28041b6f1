#pragma once

// Scaling studies for shrinking potentials near the boundary, half-space
// image-kernel norms, the CLR audit and the boundary-condition dichotomy.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "betacrit/birman_schwinger.hpp"
#include "betacrit/direct_spectrum.hpp"
#include "betacrit/green_kernels.hpp"
#include "betacrit/quadrature.hpp"

namespace betacrit {

// ---------------------------------------------------------------------------
// d = 1 scaling

/// Zero-energy threshold of a constant well h chi_[a, b] on the Dirichlet
/// half-line: the root k of k (b - a) + arctan(k a) = pi/2, beta = k^2 / h.
inline double indicator_threshold_1d(double a, double b, double height) {
  if (!(b > a) || a < 0.0 || !(height > 0.0)) throw DomainError("indicator_threshold_1d: need 0 <= a < b, h > 0");
  auto f = [&](double k) { return k * (b - a) + std::atan(k * a) - 0.5 * std::numbers::pi; };
  double lo = 0.0, hi = 0.5 * std::numbers::pi / (b - a);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? hi : lo) = mid;
  }
  const double k = 0.5 * (lo + hi);
  return k * k / height;
}

struct ScalingRow {
  double n = 0.0;
  double beta_bs = 0.0;
  double beta_direct = 0.0;
  std::optional<double> oracle; // indicator profiles only
  int m = 0;
  double mesh = 0.0;
};

struct ScalingStudy {
  ScaledPotentialFamily family;
  std::vector<ScalingRow> rows;
  bool monotone = true;
  std::vector<std::string> notices;
};

namespace detail {

inline bool is_indicator(const UnitProfile& w) {
  const auto v = w.curve().values();
  return w.curve().knots().front() == 0.0 && std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

/// Grid prefix before the first inadmissible n, with a notice when truncated.
inline std::vector<double> admissible_prefix(const ScaledPotentialFamily& f, const std::vector<double>& grid,
                                             std::vector<std::string>& notices) {
  const auto bad = first_inadmissible(f, grid);
  if (!bad) return grid;
  notices.push_back("n grid truncated: V_n is inadmissible from n = " + std::to_string(*bad));
  return {grid.begin(), std::find(grid.begin(), grid.end(), *bad)};
}

} // namespace detail

/// beta_cr(n) of the Dirichlet half-line along a d = 1 family, by the
/// Birman-Schwinger limit kernel and by the direct count. The mesh scales with
/// the support width so every n gets the same cells per support.
inline ScalingStudy scaling_study_1d(const ScaledPotentialFamily& family, const std::vector<double>& n_grid,
                                     const Numerics& num = {}) {
  if (family.dimension != 1) throw ValidationError("family.dimension", "scaling_study_1d needs d = 1");
  ScalingStudy study;
  study.family = family;
  const auto grid = detail::admissible_prefix(family, n_grid, study.notices);
  const ProblemSpec problem = ProblemSpec::half_line(BoundaryCondition::Dirichlet);
  study.rows.resize(grid.size());
  Numerics inner = num;
  inner.threads = 1;
  parallel_for(grid.size(), num.threads, [&](std::size_t i) {
    const double n = grid[i];
    const Potential v = realize_scaled(family, n);
    Numerics local = inner;
    local.mesh = num.mesh * std::min(1.0, v.hi() - v.lo());
    ScalingRow row;
    row.n = n;
    row.m = num.m;
    row.mesh = local.mesh;
    row.beta_bs = beta_critical(problem, v, BetaMethod::LimitKernel, local).beta_cr;
    row.beta_direct = beta_critical_direct(problem, v, local).beta_cr;
    if (detail::is_indicator(family.base)) row.oracle = indicator_threshold_1d(v.lo(), v.hi(), v.max_value());
    study.rows[i] = row;
  });
  for (std::size_t i = 1; i < study.rows.size(); ++i)
    study.monotone = study.monotone && study.rows[i].beta_bs > study.rows[i - 1].beta_bs &&
                     study.rows[i].beta_direct > study.rows[i - 1].beta_direct;
  return study;
}

// ---------------------------------------------------------------------------
// half-space image kernels

enum class HalfspaceCoordinates { Rescaled, Original };

namespace detail {

/// Integral of the singular part over the support ball (radius a, centre c):
///   d = 3:  int |x - xi|^{-1} dxi = 2 pi (a^2 - |x - c|^2 / 3)
///   d = 2:  int ln|x - xi| dxi   = pi a^2 ln a - (pi / 2)(a^2 - |x - c|^2)
inline double singular_ball_integral(int d, double a, double dist2) {
  if (d == 3) return 2.0 * std::numbers::pi * (a * a - dist2 / 3.0);
  return std::numbers::pi * a * a * std::log(a) - 0.5 * std::numbers::pi * (a * a - dist2);
}

/// Nystrom matrix of  factor * sqrt(W) [s(x, xi) + image(x, xi)] sqrt(W)  on the
/// ball rule of radius a about c, where s = |x - xi|^{-1} (d = 3) or
/// -ln|x - xi| (d = 2) is integrated analytically on the diagonal cell.
/// image_shift < 0 drops the image term.
inline Eigen::MatrixXd image_matrix(int d, ImageSign sign, const quadrature::BallRule& rule, const Point& c, double a,
                                    const UnitProfile& w, double factor, double image_shift) {
  const std::size_t m = rule.size();
  const bool with_image = image_shift >= 0.0;
  auto singular = [&](double dist) { return d == 3 ? 1.0 / dist : -std::log(dist); };
  auto image = [&](const Point& x, const Point& xi) {
    if (!with_image) return 0.0;
    const double di = distance(image_offset(x, xi, image_shift), Point{0.0, 0.0, 0.0}, d);
    return d == 3 ? (sign == ImageSign::Minus ? -1.0 : 1.0) / di : std::log(di);
  };
  std::vector<double> rw(m);
  for (std::size_t i = 0; i < m; ++i) rw[i] = std::sqrt(std::max(0.0, w(distance(rule.nodes[i], c, d) / a)));
  Eigen::MatrixXd mat(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    double offsum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const double s = singular(distance(rule.nodes[i], rule.nodes[j], d));
      offsum += rule.weights[j] * s;
      mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::sqrt(rule.weights[i]) * rw[i] * factor * (s + image(rule.nodes[i], rule.nodes[j])) * rw[j] *
          std::sqrt(rule.weights[j]);
    }
    const double dist2 = std::pow(distance(rule.nodes[i], c, d), 2);
    const double cell = d == 3 ? singular_ball_integral(3, a, dist2) : -singular_ball_integral(2, a, dist2);
    mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
        rw[i] * rw[i] * factor * (cell - offsum + rule.weights[i] * image(rule.nodes[i], rule.nodes[i]));
  }
  return 0.5 * (mat + mat.transpose());
}

} // namespace detail

/// Symmetrized Nystrom matrix of the half-space image-kernel operator for
/// V_n. Rescaled coordinates use y = (x - x(n)) n on the unit ball;
/// original coordinates use the ball of radius 1/n at x(n) with the
/// n-dependent prefactor, which must give the same operator.
inline Eigen::MatrixXd halfspace_matrix(int d, ImageSign sign, const ScaledPotentialFamily& family, double n,
                                        int radial, int angular,
                                        HalfspaceCoordinates coords = HalfspaceCoordinates::Rescaled) {
  if (d != 2 && d != 3) throw DomainError("half-space study: dimension must be 2 or 3");
  if (d == 2 && sign == ImageSign::Plus) throw DomainError("half-space study: d = 2 supports the minus sign only");
  (void)realize_scaled(family, n); // admissibility and h_d(n) domain checks
  const bool rescaled = coords == HalfspaceCoordinates::Rescaled;
  const double xn = family.center(n);
  const double a = rescaled ? 1.0 : 1.0 / n;
  const Point c = rescaled ? Point{0.0, 0.0, 0.0} : Point{xn, 0.0, 0.0};
  const auto rule = quadrature::ball_rule(d, radial, angular, a * family.base.support_radius(), c);
  const double pre = d == 3 ? 1.0 / (4.0 * std::numbers::pi) : 1.0 / (2.0 * std::numbers::pi * std::log(n));
  const double factor = rescaled ? pre : pre * n * n;
  return detail::image_matrix(d, sign, rule, c, a, family.base, factor, rescaled ? 2.0 * n * xn : 0.0);
}

/// Node counts of the ball rule used for roughly m nodes.
inline std::pair<int, int> ball_resolution(int d, int m) {
  if (d == 2) {
    const int q = std::max(4, static_cast<int>(std::lround(std::sqrt(static_cast<double>(m)))));
    return {q, q};
  }
  const int q = std::max(3, static_cast<int>(std::lround(std::cbrt(m / 2.0))));
  return {q, 2 * q};
}

inline double halfspace_norm(int d, ImageSign sign, const ScaledPotentialFamily& family, double n, int radial,
                             int angular, const Numerics& num,
                             HalfspaceCoordinates coords = HalfspaceCoordinates::Rescaled) {
  return principal_eigenvalue(halfspace_matrix(d, sign, family, n, radial, angular, coords), num.tol,
                              num.max_iterations);
}

/// Eigenvalue of (1/4pi) int_{|sigma|<b} |y - sigma|^{-1} on the ball of
/// radius b: kb = pi/2 with mu = 1/k^2.
inline double newtonian_ball_eigenvalue(double b) { return 4.0 * b * b / (std::numbers::pi * std::numbers::pi); }

struct HalfspaceRow {
  double n = 0.0;
  double nx = 0.0;       // n x(n)_1, the rescaled distance to the boundary
  double norm = 0.0;
  double refined = 0.0;  // same norm on a finer ball rule
  double lower_bound = std::numeric_limits<double>::quiet_NaN();
  bool quadrature_converged = true;
};

struct HalfspaceStudy {
  int dimension = 3;
  ImageSign sign = ImageSign::Minus;
  ScaledPotentialFamily family;
  std::vector<HalfspaceRow> rows;
  std::string classification; // "to-zero" | "bounded-below" | "unclassified"
  double minorant = std::numeric_limits<double>::quiet_NaN();
  double minorant_bruteforce = std::numeric_limits<double>::quiet_NaN();
  double rescaling_gap = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> notices;
};

/// Fixed-ball minorant for d = 3: on the sub-ball |y| <= b with W >= alpha
/// and n x(n) >= C the kernel is at least rho c_3 alpha |y - sigma|^{-1},
/// rho = 1 - b/(C - b) for the minus sign and 1 for the plus sign.
inline double halfspace_minorant(ImageSign sign, const UnitProfile& w, double c_min, double b = 0.25) {
  if (!(c_min > 2.0 * b)) throw DomainError("minorant: need n x(n) > 2b");
  double alpha = std::numeric_limits<double>::infinity();
  for (double t = 0.0; t <= b + 1e-15; t += b / 64.0) alpha = std::min(alpha, w(t));
  const double rho = sign == ImageSign::Minus ? 1.0 - b / (c_min - b) : 1.0;
  return rho * alpha * newtonian_ball_eigenvalue(b);
}

inline HalfspaceStudy halfspace_norm_study(int d, ImageSign sign, const ScaledPotentialFamily& family,
                                           const std::vector<double>& n_grid, const Numerics& num = {}) {
  if (family.dimension != d) throw ValidationError("family.dimension", "family and study dimensions differ");
  HalfspaceStudy st;
  st.dimension = d;
  st.sign = sign;
  st.family = family;
  const auto grid = detail::admissible_prefix(family, n_grid, st.notices);
  const auto [radial, angular] = ball_resolution(d, num.m);
  st.rows.resize(grid.size());
  parallel_for(grid.size(), num.threads, [&](std::size_t i) {
    HalfspaceRow row;
    row.n = grid[i];
    row.nx = grid[i] * family.center(grid[i]);
    row.norm = halfspace_norm(d, sign, family, row.n, radial, angular, num);
    row.refined = halfspace_norm(d, sign, family, row.n, radial + 2, angular + 4, num);
    row.quadrature_converged = std::abs(row.refined - row.norm) <= 0.02 * std::abs(row.refined);
    if (d == 2 && family.decay < 1.0) row.lower_bound = (1.0 - family.decay) / (4.0 * std::numbers::pi) * family.base.integral(2);
    st.rows[i] = row;
  });
  if (st.rows.empty()) return st;

  if (d == 3) {
    double c_min = std::numeric_limits<double>::infinity();
    for (const auto& r : st.rows) c_min = std::min(c_min, r.nx);
    st.minorant = halfspace_minorant(sign, family.base, c_min);
    // brute-force eigensolve of the minorant kernel on the sub-ball
    const double b = 0.25;
    const auto rule = quadrature::ball_rule(3, radial + 2, angular + 4, b);
    const Eigen::MatrixXd sub = detail::image_matrix(3, sign, rule, Point{0.0, 0.0, 0.0}, b, UnitProfile::indicator(),
                                                     1.0 / (4.0 * std::numbers::pi), -1.0);
    st.minorant_bruteforce =
        st.minorant / newtonian_ball_eigenvalue(b) * principal_eigenvalue(sub, num.tol, num.max_iterations);
    for (auto& r : st.rows) r.lower_bound = st.minorant;
    // same operator in original coordinates at the first n
    const double n0 = st.rows.front().n;
    const double orig = halfspace_norm(d, sign, family, n0, radial, angular, num, HalfspaceCoordinates::Original);
    st.rescaling_gap = std::abs(orig - st.rows.front().norm) / st.rows.front().norm;
  } else {
    const double n0 = st.rows.front().n;
    const double orig = halfspace_norm(d, sign, family, n0, radial, angular, num, HalfspaceCoordinates::Original);
    st.rescaling_gap = std::abs(orig - st.rows.front().norm) / st.rows.front().norm;
  }

  bool decreasing = true, above = true;
  for (std::size_t i = 0; i < st.rows.size(); ++i) {
    if (i > 0) decreasing = decreasing && st.rows[i].norm < st.rows[i - 1].norm;
    if (!std::isnan(st.rows[i].lower_bound)) above = above && st.rows[i].norm >= st.rows[i].lower_bound;
  }
  if (d == 2 && family.decay == 1.0)
    st.classification = decreasing ? "to-zero" : "unclassified";
  else
    st.classification = above ? "bounded-below" : "unclassified";
  for (const auto& r : st.rows)
    if (!r.quadrature_converged)
      st.notices.push_back("quadrature not converged near the kernel singularity at n = " + std::to_string(r.n));
  return st;
}

// ---------------------------------------------------------------------------
// CLR audit

inline constexpr double kClrConstant3 = 0.1156;

struct ClrRow {
  double beta = 0.0;
  int count = 0;       // sum over l of (2l + 1) N_l
  double bound = 0.0;  // C_3 beta^{3/2} int V^{3/2} dx
  bool converged = true;
  bool violation = false;
  std::vector<int> per_sector;
};

struct ClrAudit {
  std::vector<ClrRow> rows;
  int violations = 0;
  double slope = std::numeric_limits<double>::quiet_NaN(); // log-log slope of count vs beta
};

/// Number of negative eigenvalues with multiplicity for a radial d = 3
/// problem: sectors are added until one has no bound state.
inline ClrRow clr_count(const ProblemSpec& problem, const Potential& potential, double beta, const Numerics& num,
                        double clr_constant = kClrConstant3) {
  ClrRow row;
  row.beta = beta;
  row.bound = clr_constant * std::pow(beta, 1.5) * potential.radial_power_integral(1.5, 3);
  if (potential.is_zero() || beta == 0.0) return row;
  for (int l = 0; l < 10000; ++l) {
    const CountResult c = count_negative(problem.with_sector(l), potential, beta, num);
    row.converged = row.converged && c.converged;
    if (c.count == 0) break;
    row.per_sector.push_back(c.count);
    row.count += (2 * l + 1) * c.count;
  }
  row.violation = row.count > row.bound;
  return row;
}

inline ClrAudit clr_audit(const ProblemSpec& problem, const Potential& potential, const std::vector<double>& betas,
                          const Numerics& num = {}, double clr_constant = kClrConstant3) {
  if (problem.dimension != 3 || problem.geometry != Geometry::ExteriorBall)
    throw ValidationError("problem.dimension", "the CLR audit needs the d = 3 exterior ball");
  require_valid(problem, potential);
  ClrAudit audit;
  audit.rows.resize(betas.size());
  Numerics inner = num;
  inner.threads = 1;
  parallel_for(betas.size(), num.threads,
               [&](std::size_t i) { audit.rows[i] = clr_count(problem, potential, betas[i], inner, clr_constant); });
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int k = 0;
  for (const auto& r : audit.rows) {
    audit.violations += r.violation ? 1 : 0;
    if (r.count > 0) {
      const double x = std::log(r.beta), y = std::log(static_cast<double>(r.count));
      sx += x, sy += y, sxx += x * x, sxy += x * y, ++k;
    }
  }
  if (k >= 2) audit.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  return audit;
}

// ---------------------------------------------------------------------------
// dichotomy

struct LabeledPotential {
  std::string label;
  Potential potential;
};

struct DichotomyRow {
  int dimension = 1;
  BoundaryCondition bc = BoundaryCondition::Dirichlet;
  std::string potential;
  LimitVerdict verdict;
  LimitKind expected = LimitKind::Bounded;
  bool matches = false;
};

/// classify_limit over (d, BC, V): d = 1 on the half-line, d = 2 on the
/// exterior of the unit disk in sector 0. Dirichlet must be bounded and
/// Neumann divergent.
inline std::vector<DichotomyRow> dichotomy_suite(const std::vector<LabeledPotential>& half_line,
                                                 const std::vector<LabeledPotential>& exterior_disk,
                                                 const Numerics& num = {}) {
  struct Case {
    int d;
    BoundaryCondition bc;
    const LabeledPotential* v;
  };
  std::vector<Case> cases;
  for (auto bc : {BoundaryCondition::Dirichlet, BoundaryCondition::Neumann}) {
    for (const auto& v : half_line) cases.push_back({1, bc, &v});
    for (const auto& v : exterior_disk) cases.push_back({2, bc, &v});
  }
  std::vector<DichotomyRow> rows(cases.size());
  Numerics inner = num;
  inner.threads = 1;
  parallel_for(cases.size(), num.threads, [&](std::size_t i) {
    const Case& c = cases[i];
    const ProblemSpec p = c.d == 1 ? ProblemSpec::half_line(c.bc) : ProblemSpec::exterior_ball(2, 1.0, c.bc, 0);
    const MuCurve curve = mu_curve(p, c.v->potential, num.lambda_grid(), inner);
    DichotomyRow row;
    row.dimension = c.d;
    row.bc = c.bc;
    row.potential = c.v->label;
    row.verdict = classify_limit(curve.samples, num);
    row.expected = c.bc == BoundaryCondition::Dirichlet ? LimitKind::Bounded : LimitKind::Divergent;
    row.matches = row.verdict.kind == row.expected;
    if (row.matches && c.bc == BoundaryCondition::Neumann)
      row.matches = c.d == 1 ? (!row.verdict.logarithmic && std::abs(row.verdict.exponent + 0.5) <= 0.05)
                             : row.verdict.logarithmic;
    rows[i] = row;
  });
  return rows;
}

} // namespace betacrit
