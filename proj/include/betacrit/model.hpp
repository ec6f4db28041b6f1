#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "betacrit/errors.hpp"

namespace betacrit {

enum class Geometry { HalfLine, ExteriorBall, HalfSpace };
enum class BoundaryCondition { Dirichlet, Neumann, Fkw };

inline const char* to_string(Geometry g) {
  switch (g) {
  case Geometry::HalfLine: return "half_line";
  case Geometry::ExteriorBall: return "exterior_ball";
  case Geometry::HalfSpace: return "half_space";
  }
  return "?";
}

inline const char* to_string(BoundaryCondition bc) {
  switch (bc) {
  case BoundaryCondition::Dirichlet: return "dirichlet";
  case BoundaryCondition::Neumann: return "neumann";
  case BoundaryCondition::Fkw: return "fkw";
  }
  return "?";
}

/// Area of the unit sphere S^{d-1} (|S^0| = 2).
inline double sphere_area(int d) {
  switch (d) {
  case 1: return 2.0;
  case 2: return 2.0 * std::numbers::pi;
  case 3: return 4.0 * std::numbers::pi;
  }
  throw DomainError("dimension must be 1, 2 or 3");
}

/// Piecewise-linear interpolant through (knot, value) pairs. Knots are
/// strictly increasing; outside [front, back] the caller decides.
class PiecewiseLinear {
public:
  PiecewiseLinear() = default;
  PiecewiseLinear(std::vector<double> knots, std::vector<double> values)
      : knots_(std::move(knots)), values_(std::move(values)) {
    if (knots_.size() != values_.size() || knots_.empty())
      throw ValidationError("profile", "profile needs matching, non-empty knots and values");
    for (std::size_t i = 1; i < knots_.size(); ++i)
      if (!(knots_[i] > knots_[i - 1]))
        throw ValidationError("profile", "profile knots must be strictly increasing");
  }

  bool empty() const { return knots_.empty(); }
  std::span<const double> knots() const { return knots_; }
  std::span<const double> values() const { return values_; }
  double front() const { return knots_.front(); }
  double back() const { return knots_.back(); }

  /// Interpolated value, clamped to the end values outside the knot range.
  double operator()(double t) const {
    if (knots_.size() == 1 || t <= knots_.front()) return values_.front();
    if (t >= knots_.back()) return values_.back();
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const auto i = static_cast<std::size_t>(it - knots_.begin()) - 1;
    const double s = (t - knots_[i]) / (knots_[i + 1] - knots_[i]);
    return (1.0 - s) * values_[i] + s * values_[i + 1];
  }

  double min_value() const { return *std::min_element(values_.begin(), values_.end()); }
  double max_value() const { return *std::max_element(values_.begin(), values_.end()); }

  /// Exact integral of t^power * f(t) over [a, b] within the knot range
  /// (power in {0, 1, 2}).
  double moment(double a, double b, int power) const;

  /// Lebesgue measure (weighted by t^power) of {t in [a,b] : f(t) > 0}.
  double positive_measure(double a, double b, int power) const;

private:
  std::vector<double> knots_;
  std::vector<double> values_;
};

namespace detail {
inline double poly_moment(double a, double b, int power) {
  return (std::pow(b, power + 1) - std::pow(a, power + 1)) / (power + 1);
}
} // namespace detail

inline double PiecewiseLinear::moment(double a, double b, int power) const {
  double total = 0.0;
  // linear piece f(t) = c0 + c1 t on [lo, hi]
  auto piece = [&](double lo, double hi, double t0, double f0, double t1, double f1) {
    if (hi <= lo) return;
    const double c1 = (t1 > t0) ? (f1 - f0) / (t1 - t0) : 0.0;
    const double c0 = f0 - c1 * t0;
    total += c0 * detail::poly_moment(lo, hi, power) + c1 * detail::poly_moment(lo, hi, power + 1);
  };
  if (knots_.size() == 1) {
    piece(a, b, 0.0, values_[0], 0.0, values_[0]);
    return total;
  }
  piece(a, std::min(b, knots_.front()), 0.0, values_.front(), 0.0, values_.front());
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i)
    piece(std::max(a, knots_[i]), std::min(b, knots_[i + 1]), knots_[i], values_[i],
          knots_[i + 1], values_[i + 1]);
  piece(std::max(a, knots_.back()), b, 0.0, values_.back(), 0.0, values_.back());
  return total;
}

inline double PiecewiseLinear::positive_measure(double a, double b, int power) const {
  std::vector<double> cuts{a};
  for (double k : knots_)
    if (k > a && k < b) cuts.push_back(k);
  cuts.push_back(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    const double g0 = (*this)(lo), g1 = (*this)(hi);
    if (g0 > 0.0 && g1 > 0.0) {
      total += detail::poly_moment(lo, hi, power);
    } else if (g0 > 0.0 || g1 > 0.0) {
      const double root = lo + (hi - lo) * g0 / (g0 - g1);
      total += g0 > 0.0 ? detail::poly_moment(lo, root, power) : detail::poly_moment(root, hi, power);
    }
  }
  return total;
}

/// Radial coefficient a(r): piecewise linear through samples, a = 1 beyond
/// the last knot R_a. An empty profile is a == 1.
class CoefficientProfile {
public:
  CoefficientProfile() = default;
  CoefficientProfile(std::vector<double> knots, std::vector<double> values)
      : curve_(std::move(knots), std::move(values)) {}

  bool is_identity() const { return curve_.empty(); }
  double operator()(double r) const { return curve_.empty() || r >= curve_.back() ? 1.0 : curve_(r); }
  double min_value() const { return curve_.empty() ? 1.0 : std::min(1.0, curve_.min_value()); }
  double max_value() const { return curve_.empty() ? 1.0 : std::max(1.0, curve_.max_value()); }
  /// Radius beyond which a == 1 (0 for the identity profile).
  double stabilization_radius() const { return curve_.empty() ? 0.0 : curve_.back(); }
  std::span<const double> knots() const { return curve_.knots(); }
  std::span<const double> values() const { return curve_.values(); }

private:
  PiecewiseLinear curve_;
};

/// Geometry, dimension, coefficient and boundary condition of one exterior
/// problem. For ExteriorBall the radial coordinate is r = |x| > R0; for
/// HalfLine it is the distance x > 0; HalfSpace is only used by the image
/// kernel studies.
struct ProblemSpec {
  int dimension = 1;
  Geometry geometry = Geometry::HalfLine;
  double inner_radius = 0.0;
  CoefficientProfile coefficient{};
  BoundaryCondition bc = BoundaryCondition::Dirichlet;
  int sector = 0;

  static ProblemSpec half_line(BoundaryCondition bc, CoefficientProfile a = {}) {
    return ProblemSpec{1, Geometry::HalfLine, 0.0, std::move(a), bc, 0};
  }
  static ProblemSpec exterior_ball(int d, double r0, BoundaryCondition bc, int sector = 0,
                                   CoefficientProfile a = {}) {
    return ProblemSpec{d, Geometry::ExteriorBall, r0, std::move(a), bc, sector};
  }
  static ProblemSpec half_space(int d, BoundaryCondition bc) {
    return ProblemSpec{d, Geometry::HalfSpace, 0.0, {}, bc, 0};
  }

  /// Radial position of the obstacle boundary.
  double boundary() const { return geometry == Geometry::ExteriorBall ? inner_radius : 0.0; }

  ProblemSpec with_sector(int l) const {
    ProblemSpec p = *this;
    p.sector = l;
    return p;
  }
  ProblemSpec with_bc(BoundaryCondition b) const {
    ProblemSpec p = *this;
    p.bc = b;
    return p;
  }
};

/// Radial profile W(t), t = |y| in [0, 1], piecewise linear, zero for t > 1.
class UnitProfile {
public:
  UnitProfile() : UnitProfile(indicator()) {}
  UnitProfile(std::vector<double> knots, std::vector<double> values)
      : curve_(std::move(knots), std::move(values)) {
    if (curve_.front() < 0.0 || curve_.back() > 1.0 + 1e-12)
      throw ValidationError("profile", "unit profile knots must lie in [0, 1]");
  }

  /// Indicator of the closed unit ball.
  static UnitProfile indicator() { return UnitProfile({0.0, 1.0}, {1.0, 1.0}); }

  /// Smooth bump (1 - t^2)^2 sampled on a uniform grid.
  static UnitProfile bump(int samples = 65) {
    std::vector<double> t(samples), w(samples);
    for (int i = 0; i < samples; ++i) {
      t[i] = static_cast<double>(i) / (samples - 1);
      w[i] = std::pow(1.0 - t[i] * t[i], 2);
    }
    return UnitProfile(std::move(t), std::move(w));
  }

  double operator()(double t) const { return t > curve_.back() ? 0.0 : curve_(t); }
  const PiecewiseLinear& curve() const { return curve_; }
  double max_value() const { return curve_.max_value(); }

  /// Largest t with W(t) > 0 (0 if W vanishes identically).
  double support_radius() const {
    const auto k = curve_.knots();
    const auto v = curve_.values();
    for (std::size_t i = k.size(); i-- > 0;) {
      if (v[i] > 0.0) {
        if (i + 1 < k.size()) return k[i] + (k[i + 1] - k[i]) * v[i] / (v[i] - v[i + 1]);
        return k[i];
      }
    }
    return 0.0;
  }

  /// Integral of W over the unit ball in R^d.
  double integral(int d) const {
    if (d == 1) return 2.0 * curve_.moment(0.0, curve_.back(), 0);
    return sphere_area(d) * curve_.moment(0.0, curve_.back(), d - 1);
  }

  /// Measure of {W > 0} in R^d.
  double support_measure(int d) const {
    if (d == 1) return 2.0 * curve_.positive_measure(0.0, curve_.back(), 0);
    return sphere_area(d) * curve_.positive_measure(0.0, curve_.back(), d - 1);
  }

private:
  PiecewiseLinear curve_;
};

/// Compactly supported nonnegative potential. Interval kind: a radial (or
/// half-line) profile V(r) on [lo, hi]. Ball kind: amplitude * W(|x-c|/radius)
/// on a ball whose centre sits at distance `center` from the flat boundary.
class Potential {
public:
  enum class Kind { Interval, Ball };

  Potential() = default;

  /// Piecewise-linear profile through absolute knots; zero outside [front, back].
  static Potential sampled(std::vector<double> knots, std::vector<double> values,
                           double amplitude = 1.0) {
    Potential p;
    p.kind_ = Kind::Interval;
    p.curve_ = PiecewiseLinear(std::move(knots), std::move(values));
    p.amplitude_ = amplitude;
    return p;
  }
  static Potential indicator(double lo, double hi, double amplitude = 1.0) {
    if (!(hi > lo)) throw ValidationError("potential.support", "support must have hi > lo");
    return sampled({lo, hi}, {1.0, 1.0}, amplitude);
  }
  /// Piecewise-linear hat, zero at both ends and one at the midpoint.
  static Potential hat(double lo, double hi, double amplitude = 1.0) {
    if (!(hi > lo)) throw ValidationError("potential.support", "support must have hi > lo");
    return sampled({lo, 0.5 * (lo + hi), hi}, {0.0, 1.0, 0.0}, amplitude);
  }
  static Potential zero() { return Potential{}; }

  static Potential ball(int d, double center, double radius, UnitProfile profile,
                        double amplitude) {
    Potential p;
    p.kind_ = Kind::Ball;
    p.dimension_ = d;
    p.center_ = center;
    p.radius_ = radius;
    p.profile_ = std::move(profile);
    p.amplitude_ = amplitude;
    return p;
  }

  Kind kind() const { return kind_; }
  bool is_zero() const {
    if (amplitude_ == 0.0) return true;
    if (kind_ == Kind::Interval) return curve_.empty() || curve_.max_value() <= 0.0;
    return profile_.max_value() <= 0.0;
  }
  double amplitude() const { return amplitude_; }

  // Interval kind
  double lo() const { return curve_.empty() ? 0.0 : curve_.front(); }
  double hi() const { return curve_.empty() ? 0.0 : curve_.back(); }
  const PiecewiseLinear& curve() const { return curve_; }
  double operator()(double r) const {
    if (curve_.empty() || r < curve_.front() || r > curve_.back()) return 0.0;
    return amplitude_ * curve_(r);
  }
  /// Breakpoints of the profile (support ends included).
  std::vector<double> knots() const { return {curve_.knots().begin(), curve_.knots().end()}; }

  // Ball kind
  int dimension() const { return dimension_; }
  double center() const { return center_; }
  double radius() const { return radius_; }
  const UnitProfile& profile() const { return profile_; }

  double max_value() const {
    if (is_zero()) return 0.0;
    return amplitude_ * (kind_ == Kind::Interval ? curve_.max_value() : profile_.max_value());
  }
  double min_sample() const {
    if (kind_ == Kind::Interval) return curve_.empty() ? 0.0 : curve_.min_value();
    return profile_.curve().min_value();
  }

  /// Lebesgue measure of {V > 0}. Interval kind is measured on the line.
  double support_measure() const {
    if (is_zero()) return 0.0;
    if (kind_ == Kind::Interval) return curve_.positive_measure(lo(), hi(), 0);
    return std::pow(radius_, dimension_) * profile_.support_measure(dimension_);
  }

  /// Integral of V^p over the domain for a radial profile in dimension d
  /// (d = 1 on the half-line counts one half-line).
  double radial_power_integral(double p, int d) const;

private:
  Kind kind_ = Kind::Interval;
  PiecewiseLinear curve_{};
  double amplitude_ = 0.0;
  int dimension_ = 1;
  double center_ = 0.0;
  double radius_ = 0.0;
  UnitProfile profile_{};
};

inline double Potential::radial_power_integral(double p, int d) const {
  if (is_zero() || kind_ != Kind::Interval) return 0.0;
  // 10-point Gauss-Legendre per linear segment; exact for p = 1, 2.
  static constexpr double x[5] = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                  0.8650633666889845, 0.9739065285171717};
  static constexpr double w[5] = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                  0.1494513491505806, 0.0666713443086881};
  const auto k = curve_.knots();
  const double area = d == 1 ? 1.0 : sphere_area(d);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < k.size(); ++i) {
    const double mid = 0.5 * (k[i] + k[i + 1]), half = 0.5 * (k[i + 1] - k[i]);
    for (int j = 0; j < 5; ++j)
      for (double s : {-x[j], x[j]}) {
        const double r = mid + half * s;
        total += w[j] * half * std::pow((*this)(r), p) * std::pow(r, d - 1);
      }
  }
  return area * total;
}

/// Amplitude factor that keeps the zero-energy operator norm of the
/// shrinking family n-independent in free space.
inline double h_factor(int d, double n) {
  if (!(n > 0.0)) throw DomainError("h_factor: n must be positive");
  switch (d) {
  case 1: return n;
  case 2:
    if (n <= 1.0) throw DomainError("h_factor: d = 2 requires n > 1 (log scaling undefined)");
    return n * n / std::log(n);
  case 3: return n * n;
  }
  throw DomainError("h_factor: dimension must be 1, 2 or 3");
}

/// V_n(x) = h_d(n) W((x - x(n)) n), with x(n) = offset * n^{-decay} measured
/// from the boundary along the inward normal.
struct ScaledPotentialFamily {
  UnitProfile base = UnitProfile::indicator();
  double offset = 1.0;
  double decay = 1.0;
  int dimension = 1;

  double center(double n) const { return offset * std::pow(n, -decay); }
};

/// Realize V_n. Throws ValidationError if the support leaks out of the domain.
inline Potential realize_scaled(const ScaledPotentialFamily& family, double n) {
  if (!(family.offset > 0.0)) throw ValidationError("family.offset", "center offset must be positive");
  if (family.decay < 0.0 || family.decay > 1.0)
    throw ValidationError("family.decay", "decay exponent must lie in [0, 1]");
  const double xn = family.center(n);
  const double reach = family.base.support_radius() / n;
  if (xn - reach < -1e-12 * std::max(1.0, xn))
    throw ValidationError("family", "support of V_n leaks outside the domain at n = " +
                                        std::to_string(n));
  const double amp = h_factor(family.dimension, n);
  if (family.dimension == 1) {
    // mirror the radial samples around x(n)
    const auto t = family.base.curve().knots();
    const auto w = family.base.curve().values();
    std::vector<double> knots, values;
    for (std::size_t i = t.size(); i-- > 0;) {
      if (t[i] == 0.0) continue;
      knots.push_back(xn - t[i] / n);
      values.push_back(w[i]);
    }
    if (t.front() == 0.0) {
      knots.push_back(xn);
      values.push_back(w.front());
    } else {
      knots.push_back(xn);
      values.push_back(family.base.curve()(0.0));
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] == 0.0) continue;
      knots.push_back(xn + t[i] / n);
      values.push_back(w[i]);
    }
    // clip to the closed half-line (rounding only)
    if (knots.front() < 0.0) knots.front() = 0.0;
    return Potential::sampled(std::move(knots), std::move(values), amp);
  }
  return Potential::ball(family.dimension, xn, 1.0 / n, family.base, amp);
}

/// First n of the grid whose realization is inadmissible, if any.
inline std::optional<double> first_inadmissible(const ScaledPotentialFamily& family,
                                                std::span<const double> n_grid) {
  for (double n : n_grid) {
    try {
      (void)realize_scaled(family, n);
    } catch (const ValidationError&) {
      return n;
    } catch (const DomainError&) {
      return n;
    }
  }
  return std::nullopt;
}

struct Diagnostic {
  std::string code;
  std::string message;
};

/// Check every model invariant; an empty list means the pair is admissible.
inline std::vector<Diagnostic> validate(const ProblemSpec& problem, const Potential& potential) {
  std::vector<Diagnostic> out;
  auto fail = [&](const char* code, std::string msg) { out.push_back({code, std::move(msg)}); };

  if (problem.dimension < 1 || problem.dimension > 3)
    fail("dimension", "dimension must be 1, 2 or 3");
  if (problem.geometry == Geometry::ExteriorBall && !(problem.inner_radius > 0.0))
    fail("inner_radius", "exterior ball needs R0 > 0");
  if (problem.geometry == Geometry::HalfLine && problem.dimension != 1)
    fail("geometry", "half-line geometry requires d = 1");
  if (problem.geometry == Geometry::HalfSpace && problem.dimension < 2)
    fail("geometry", "half-space geometry requires d >= 2");
  if (problem.bc == BoundaryCondition::Fkw && problem.geometry != Geometry::ExteriorBall)
    fail("bc", "FKW condition is only available on the exterior ball");
  if (problem.sector < 0) fail("sector", "sector index must be >= 0");
  if (problem.dimension == 1 && problem.sector > 1)
    fail("sector", "d = 1 has only the even (0) and odd (1) sectors");
  if (!(problem.coefficient.min_value() > 0.0)) fail("coefficient", "a(r) must satisfy a_min > 0");
  if (!problem.coefficient.is_identity()) {
    const auto v = problem.coefficient.values();
    if (std::abs(v.back() - 1.0) > 1e-12)
      fail("coefficient", "a(r) must equal 1 at and beyond its last knot R_a");
    if (problem.coefficient.knots().front() < problem.boundary() - 1e-12)
      fail("coefficient", "a(r) knots must lie in the closure of the domain");
  }

  if (potential.is_zero()) return out;
  if (potential.min_sample() < 0.0 || potential.amplitude() < 0.0)
    fail("potential", "potential not nonnegative");
  if (potential.kind() == Potential::Kind::Interval) {
    if (problem.geometry == Geometry::HalfSpace)
      fail("potential", "half-space problems take a ball potential");
    else if (potential.lo() < problem.boundary() - 1e-12)
      fail("support", "support outside domain");
  } else {
    if (problem.geometry != Geometry::HalfSpace)
      fail("potential", "ball potentials are only used on the half-space");
    else if (potential.center() - potential.radius() * potential.profile().support_radius() <
             -1e-12)
      fail("support", "support outside domain");
    if (potential.dimension() != problem.dimension)
      fail("dimension", "potential and problem dimensions differ");
  }
  return out;
}

inline void require_valid(const ProblemSpec& problem, const Potential& potential) {
  const auto diags = validate(problem, potential);
  if (!diags.empty()) throw ValidationError(diags.front().code, diags.front().message);
}

} // namespace betacrit
