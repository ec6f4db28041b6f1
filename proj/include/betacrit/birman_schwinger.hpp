#pragma once

// Nystrom discretization of A_lambda = sqrt(V) (H_0 - lambda)^{-1} sqrt(V) in
// one angular sector, its principal eigenvalue, the lambda -> 0- analysis and
// the critical coupling beta_cr = 1 / ||A_{0-}||.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "betacrit/green_kernels.hpp"
#include "betacrit/numerics.hpp"
#include "betacrit/quadrature.hpp"

namespace betacrit {

/// Symmetrized Nystrom matrix M_ij = sqrt(w_i V_i) G(r_i, r_j) sqrt(V_j w_j).
/// The weights carry the full measure omega r^{d-1} dr of the sector, and
/// G is the sector kernel of RadialKernel; the diagonal is G(r_i, r_i).
struct KernelMatrix {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> root_v;
  Eigen::MatrixXd entries;
  double lambda = 0.0;
  int sector = 0;

  std::size_t size() const { return nodes.size(); }
};

inline std::vector<int> sector_list(const ProblemSpec& problem, int max_sector) {
  if (problem.geometry == Geometry::HalfLine) return {0};
  if (problem.dimension == 1) return {0, 1}; // even and odd parts on |x| > R0
  std::vector<int> out;
  for (int l = 0; l <= max_sector; ++l) out.push_back(l);
  return out;
}

inline KernelMatrix assemble(const ProblemSpec& problem, const Potential& potential, double lambda,
                             const Numerics& num = {}) {
  if (problem.geometry == Geometry::HalfSpace)
    throw DomainError("assemble: half-space kernels are assembled by the half-space study");
  if (potential.kind() != Potential::Kind::Interval)
    throw DomainError("assemble: radial problems need an interval potential");
  if (lambda > 0.0) throw DomainError("assemble: lambda must be <= 0");
  require_valid(problem, potential);

  KernelMatrix km;
  km.lambda = lambda;
  km.sector = problem.sector;
  if (potential.curve().empty()) {
    km.entries = Eigen::MatrixXd::Zero(0, 0);
    return km;
  }
  const RadialKernel kernel(problem, lambda, potential.hi());
  const auto breaks = potential.knots();
  const quadrature::Rule rule = quadrature::composite(potential.lo(), potential.hi(), num.m, breaks, num.panel_order);
  const std::size_t n = rule.size();
  const SectorOperator& op = kernel.sector();
  const SectorPair& pair = kernel.pair();

  km.nodes = rule.nodes;
  km.weights.resize(n);
  km.root_v.resize(n);
  std::vector<double> fphi(n), fpsi(n), scale(n);
  parallel_for(n, num.threads, [&](std::size_t i) {
    const double r = rule.nodes[i];
    km.weights[i] = op.omega * op.p(r) * rule.weights[i];
    km.root_v[i] = std::sqrt(std::max(0.0, potential(r)));
    const auto f = pair.factors(r);
    fphi[i] = f.first;
    fpsi[i] = f.second;
    scale[i] = std::sqrt(km.weights[i]) * km.root_v[i];
  });
  const double k = pair.rate(), c = pair.wronskian() * op.omega;
  km.entries.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  // nodes are sorted, so j <= i means r_j <= r_i
  parallel_for(n, num.threads, [&](std::size_t i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double g = fphi[j] * fpsi[i] * std::exp(k * (km.nodes[j] - km.nodes[i])) / c;
      const double v = scale[i] * g * scale[j];
      km.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      km.entries(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  });
  return km;
}

struct EigenResult {
  double value = 0.0;
  Eigen::VectorXd vector;
  double residual = 0.0; // ||M x - mu x|| / |mu|
  int iterations = 0;
};

namespace detail {

inline std::optional<EigenResult> power_iterate(const Eigen::MatrixXd& a, double shift, double tol,
                                                int cap) {
  const Eigen::Index n = a.rows();
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  double mu_prev = std::numeric_limits<double>::quiet_NaN();
  EigenResult out;
  for (int it = 1; it <= cap; ++it) {
    Eigen::VectorXd y = a * x + shift * x;
    const double mu = x.dot(y);
    const double res = (y - mu * x).norm();
    out = {mu - shift, x, mu != 0.0 ? res / std::abs(mu) : res, it};
    const double ny = y.norm();
    if (ny == 0.0) return EigenResult{0.0, x, 0.0, it};
    if (std::abs(mu - mu_prev) <= tol * std::abs(mu) && res <= std::sqrt(tol) * std::abs(mu)) {
      out.residual = res / std::max(std::abs(mu - shift), std::numeric_limits<double>::min());
      return out;
    }
    mu_prev = mu;
    x = y / ny;
  }
  return std::nullopt;
}

} // namespace detail

/// Largest eigenvalue of a symmetric matrix by power iteration from the
/// normalized all-ones vector. A negative or non-converged dominant
/// eigenvalue triggers an iteration on M + sI with s a Gershgorin bound.
inline EigenResult principal_eigenpair(const Eigen::MatrixXd& a, double tol = 1e-8, int cap = 20000) {
  if (a.rows() != a.cols()) throw DomainError("principal_eigenvalue: matrix must be square");
  if (a.rows() == 0) return {};
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()))
    throw DomainError("principal_eigenvalue: matrix must be symmetric");
  if (a.cwiseAbs().maxCoeff() == 0.0) return {0.0, Eigen::VectorXd::Ones(a.rows()), 0.0, 0};
  if (auto r = detail::power_iterate(a, 0.0, tol, cap); r && r->value >= 0.0) return *r;
  const double s = a.cwiseAbs().rowwise().sum().maxCoeff();
  if (auto r = detail::power_iterate(a, s, tol, cap)) return *r;
  // report what was reached
  Eigen::VectorXd x = Eigen::VectorXd::Ones(a.rows()).normalized();
  for (int it = 0; it < cap; ++it) x = (a * x + s * x).normalized();
  const double mu = x.dot(a * x);
  const double res = (a * x - mu * x).norm() / std::max(std::abs(mu), 1e-300);
  throw NumericalError("unconverged", "power iteration did not converge within " + std::to_string(cap) +
                                          " iterations; achieved residual " + std::to_string(res));
}

inline double principal_eigenvalue(const Eigen::MatrixXd& a, double tol = 1e-8, int cap = 20000) {
  return principal_eigenpair(a, tol, cap).value;
}

inline double principal_eigenvalue(const KernelMatrix& km, double tol = 1e-8, int cap = 20000) {
  return principal_eigenvalue(km.entries, tol, cap);
}

// ---------------------------------------------------------------------------
// mu_0(lambda) along a grid

struct MuSample {
  double lambda = 0.0;
  double mu0 = 0.0;
  int m = 0;
  double residual = 0.0;
};

struct MuCurve {
  int sector = 0;
  std::vector<MuSample> samples;
  bool monotone = true;
  double worst_violation = 0.0; // largest relative decrease between neighbours
};

inline void check_lambda_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw ValidationError("lambda_grid", "must not be empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] < 0.0)) throw ValidationError("lambda_grid", "values must be strictly negative");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw ValidationError("lambda_grid", "values must increase toward 0 (decreasing magnitude)");
  }
}

inline MuCurve mu_curve(const ProblemSpec& problem, const Potential& potential, const std::vector<double>& grid,
                        const Numerics& num = {}) {
  check_lambda_grid(grid);
  MuCurve curve;
  curve.sector = problem.sector;
  curve.samples.resize(grid.size());
  Numerics inner = num;
  inner.threads = 1;
  parallel_for(grid.size(), num.threads, [&](std::size_t i) {
    const KernelMatrix km = assemble(problem, potential, grid[i], inner);
    const EigenResult e = principal_eigenpair(km.entries, num.tol, num.max_iterations);
    curve.samples[i] = {grid[i], e.value, static_cast<int>(km.size()), e.residual};
  });
  for (std::size_t i = 1; i < curve.samples.size(); ++i) {
    const double a = curve.samples[i - 1].mu0, b = curve.samples[i].mu0;
    const double drop = (a - b) / std::max(std::abs(a), 1e-300);
    curve.worst_violation = std::max(curve.worst_violation, drop);
  }
  curve.monotone = curve.worst_violation <= 10.0 * num.tol;
  return curve;
}

// ---------------------------------------------------------------------------
// lambda -> 0- classification

enum class LimitKind { Bounded, Divergent, Indeterminate };

inline const char* to_string(LimitKind k) {
  switch (k) {
  case LimitKind::Bounded: return "bounded";
  case LimitKind::Divergent: return "divergent";
  case LimitKind::Indeterminate: return "indeterminate";
  }
  return "?";
}

struct LimitVerdict {
  LimitKind kind = LimitKind::Indeterminate;
  std::vector<double> growth; // relative growth per decade between neighbours
  double tail_growth = 0.0;
  bool logarithmic = false;   // Divergent: constant increments per decade
  double exponent = 0.0;      // fitted slope of ln mu against ln |lambda| on the tail
  double mu_last = 0.0;
};

/// Bounded if the last per-decade relative growth is below
/// num.bounded_growth, Divergent above num.divergent_growth, Indeterminate in
/// between. A divergent tail is logarithmic when its increments per decade
/// stay within a factor 1.5 of each other.
inline LimitVerdict classify_limit(const std::vector<MuSample>& samples, const Numerics& num = {}) {
  if (samples.size() < 4) throw ValidationError("lambda_grid", "classification needs at least 4 samples");
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (!(samples[i].lambda > samples[i - 1].lambda) || !(samples[i].lambda < 0.0))
      throw ValidationError("lambda_grid", "samples must be negative and increase toward 0");
  const double span = std::log10(samples.front().lambda / samples.back().lambda);
  if (span < 3.0 - 1e-9) throw ValidationError("lambda_grid", "classification needs at least 3 decades of |lambda|");
  for (const auto& s : samples)
    if (!(s.mu0 > 0.0)) throw DomainError("classify_limit: principal eigenvalues must be positive");

  LimitVerdict v;
  std::vector<double> incr;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double dec = std::log10(samples[i - 1].lambda / samples[i].lambda);
    v.growth.push_back(std::pow(samples[i].mu0 / samples[i - 1].mu0, 1.0 / dec) - 1.0);
    incr.push_back((samples[i].mu0 - samples[i - 1].mu0) / dec);
  }
  v.tail_growth = v.growth.back();
  v.mu_last = samples.back().mu0;

  // least-squares slope over the last three samples
  const std::size_t n = samples.size(), lo = n - 3;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = lo; i < n; ++i) {
    const double x = std::log(-samples[i].lambda), y = std::log(samples[i].mu0);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  v.exponent = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);

  if (v.tail_growth < num.bounded_growth) {
    v.kind = LimitKind::Bounded;
  } else if (v.tail_growth > num.divergent_growth) {
    v.kind = LimitKind::Divergent;
    const auto tail = std::vector<double>(incr.end() - std::min<std::size_t>(3, incr.size()), incr.end());
    const double hi = *std::max_element(tail.begin(), tail.end());
    const double lo_i = *std::min_element(tail.begin(), tail.end());
    v.logarithmic = lo_i > 0.0 && hi / lo_i <= 1.5;
  } else {
    v.kind = LimitKind::Indeterminate;
  }
  return v;
}

// ---------------------------------------------------------------------------
// beta_cr

enum class BetaMethod { LimitKernel, Extrapolation, Auto };

inline const char* to_string(BetaMethod m) {
  switch (m) {
  case BetaMethod::LimitKernel: return "limit-kernel";
  case BetaMethod::Extrapolation: return "extrapolation";
  case BetaMethod::Auto: return "auto";
  }
  return "?";
}

enum class BetaStatus { Positive, Zero, NoBoundStates };

inline const char* to_string(BetaStatus s) {
  switch (s) {
  case BetaStatus::Positive: return "positive";
  case BetaStatus::Zero: return "zero";
  case BetaStatus::NoBoundStates: return "no-bound-states";
  }
  return "?";
}

/// Per-sector estimate of mu* = ||A_{0-}|| (infinite when divergent).
struct SectorEstimate {
  int sector = 0;
  BetaMethod method = BetaMethod::LimitKernel;
  double mu_star = 0.0;
  double mu_limit = std::numeric_limits<double>::quiet_NaN();        // lambda = 0 kernel
  double mu_last = std::numeric_limits<double>::quiet_NaN();         // closest grid sample
  double mu_extrapolated = std::numeric_limits<double>::quiet_NaN(); // from the grid
  double gap = std::numeric_limits<double>::quiet_NaN();             // |extrapolated - last| / extrapolated
  std::optional<LimitVerdict> verdict;
  std::vector<MuSample> samples;
};

struct BetaCritical {
  BetaStatus status = BetaStatus::NoBoundStates;
  double beta_cr = std::numeric_limits<double>::infinity();
  double mu_star = 0.0;
  int sector = 0; // sector attaining the maximum
  std::vector<SectorEstimate> sectors;
};

/// Variable in which mu_0 approaches its limit linearly.
inline double threshold_variable(int d, double lambda) {
  const double a = std::abs(lambda);
  return d == 2 ? 1.0 / std::log(1.0 / a) : std::sqrt(a);
}

/// Richardson step on 1/mu between the last two samples, linear in
/// threshold_variable. Returns the extrapolated mu.
inline double extrapolate_mu(int d, const std::vector<MuSample>& s) {
  if (s.size() < 2) return s.empty() ? 0.0 : s.back().mu0;
  const auto& a = s[s.size() - 2];
  const auto& b = s.back();
  const double ta = threshold_variable(d, a.lambda), tb = threshold_variable(d, b.lambda);
  const double ba = 1.0 / a.mu0, bb = 1.0 / b.mu0;
  const double beta0 = (bb * ta - ba * tb) / (ta - tb);
  return 1.0 / beta0;
}

inline SectorEstimate sector_estimate(const ProblemSpec& problem, const Potential& potential, BetaMethod method,
                                      const std::vector<double>& grid, const Numerics& num) {
  SectorEstimate est;
  est.sector = problem.sector;
  const auto op = SectorOperator::from(problem, 0.0);
  const bool limit_exists = !op.zero_energy_divergent();
  if (method == BetaMethod::LimitKernel && !limit_exists) throw DivergentLimitError();

  if (limit_exists && method != BetaMethod::Extrapolation) {
    const KernelMatrix km = assemble(problem, potential, 0.0, num);
    est.mu_limit = principal_eigenvalue(km, num.tol, num.max_iterations);
    est.mu_star = est.mu_limit;
    est.method = BetaMethod::LimitKernel;
    if (method == BetaMethod::LimitKernel) return est;
  }

  const MuCurve curve = mu_curve(problem, potential, grid, num);
  est.samples = curve.samples;
  est.mu_last = curve.samples.back().mu0;
  est.verdict = classify_limit(curve.samples, num);
  const LimitKind kind = est.verdict->kind;

  if (limit_exists && method != BetaMethod::Extrapolation) {
    if (kind == LimitKind::Divergent)
      throw NumericalError("inconsistent", "limit kernel gives mu* = " + std::to_string(est.mu_limit) +
                                               " but the lambda grid classifies as divergent (last mu0 = " +
                                               std::to_string(est.mu_last) + ")");
    if (kind == LimitKind::Bounded) {
      est.mu_extrapolated = extrapolate_mu(problem.dimension, curve.samples);
      est.gap = std::abs(est.mu_extrapolated - est.mu_last) / est.mu_extrapolated;
    }
    return est;
  }
  est.method = BetaMethod::Extrapolation;
  if (kind == LimitKind::Indeterminate)
    throw NumericalError("indeterminate", "lambda -> 0- behaviour of mu0 is indeterminate in sector " +
                                              std::to_string(problem.sector) + " (tail growth " +
                                              std::to_string(est.verdict->tail_growth) + " per decade)");
  if (kind == LimitKind::Divergent) {
    est.mu_star = std::numeric_limits<double>::infinity();
    return est;
  }
  est.mu_extrapolated = extrapolate_mu(problem.dimension, curve.samples);
  est.gap = std::abs(est.mu_extrapolated - est.mu_last) / est.mu_extrapolated;
  est.mu_star = est.mu_extrapolated;
  return est;
}

/// beta_cr = 1 / max_l mu*_l over the sector list. Returns NoBoundStates for
/// V = 0 and a Zero status when some sector diverges.
inline BetaCritical beta_critical(const ProblemSpec& problem, const Potential& potential,
                                  BetaMethod method = BetaMethod::Auto, const Numerics& num = {},
                                  std::optional<std::vector<double>> grid = std::nullopt) {
  num.check();
  require_valid(problem, potential);
  BetaCritical out;
  if (potential.is_zero()) return out;
  const std::vector<double> g = grid ? *grid : num.lambda_grid();
  for (int l : sector_list(problem, num.max_sector))
    out.sectors.push_back(sector_estimate(problem.with_sector(l), potential, method, g, num));
  out.mu_star = 0.0;
  for (const auto& s : out.sectors)
    if (s.mu_star > out.mu_star) {
      out.mu_star = s.mu_star;
      out.sector = s.sector;
    }
  if (std::isinf(out.mu_star)) {
    out.status = BetaStatus::Zero;
    out.beta_cr = 0.0;
  } else {
    out.status = BetaStatus::Positive;
    out.beta_cr = 1.0 / out.mu_star;
  }
  return out;
}

// ---------------------------------------------------------------------------
// eigenspace correspondence

struct CorrespondenceResidual {
  double lambda = 0.0;
  double mu = 0.0;
  double beta = 0.0;
  double profile_gap = 0.0; // max |u_nystrom - c u_shoot| / max |u_nystrom| on supp V
  double mismatch = 0.0;    // relative Wronskian of the shooting pair at beta = 1/mu
};

/// For the principal eigenpair (mu, w) at lambda the function
/// u = (H_0 - lambda)^{-1} sqrt(V) w equals mu w / sqrt(V) on supp V and must
/// be an eigenfunction of H_0 - V/mu at energy lambda. Compares it against the
/// shooting solution of that equation and reports its decay mismatch.
inline CorrespondenceResidual correspondence_residual(const ProblemSpec& problem, const Potential& potential,
                                                      double lambda, const Numerics& num = {}) {
  const KernelMatrix km = assemble(problem, potential, lambda, num);
  const EigenResult e = principal_eigenpair(km.entries, num.tol, num.max_iterations);
  if (!(e.value > 0.0)) throw DomainError("correspondence_residual: principal eigenvalue must be positive");
  CorrespondenceResidual out;
  out.lambda = lambda;
  out.mu = e.value;
  out.beta = 1.0 / e.value;
  const SectorOperator op = SectorOperator::from(problem, lambda, potential, out.beta);
  const NumericalPair shoot(op, potential.hi());
  std::vector<double> u, s;
  for (std::size_t i = 0; i < km.size(); ++i) {
    const double dv = km.root_v[i] * std::sqrt(km.weights[i]);
    if (dv <= 0.0) continue;
    u.push_back(e.value * e.vector[static_cast<Eigen::Index>(i)] / dv);
    s.push_back(shoot.phi(km.nodes[i]));
  }
  double us = 0, ss = 0, umax = 0;
  for (std::size_t i = 0; i < u.size(); ++i) us += u[i] * s[i], ss += s[i] * s[i], umax = std::max(umax, std::abs(u[i]));
  const double c = ss > 0.0 ? us / ss : 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    out.profile_gap = std::max(out.profile_gap, std::abs(u[i] - c * s[i]) / std::max(umax, 1e-300));
  out.mismatch = shoot.relative_wronskian();
  return out;
}

} // namespace betacrit
