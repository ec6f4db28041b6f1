#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "betacrit/errors.hpp"

namespace betacrit::quadrature {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton on the three-term recurrence).
inline Rule gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: need n >= 1");
  Rule rule{std::vector<double>(n), std::vector<double>(n)};
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double step = p1 / pp;
      z -= step;
      if (std::abs(step) < 1e-15) break;
    }
    // one more derivative evaluation at the converged root
    double p1 = 1.0, p2 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
    }
    pp = n * (z * p1 - p2) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

/// Gauss-Legendre rule mapped to [a, b].
inline Rule gauss_legendre(int n, double a, double b) {
  Rule r = gauss_legendre(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (std::size_t i = 0; i < r.size(); ++i) {
    r.nodes[i] = mid + half * r.nodes[i];
    r.weights[i] *= half;
  }
  return r;
}

/// Composite Gauss-Legendre rule with about `m` nodes on [lo, hi]: uniform
/// panels of `order` points, split further at every interior breakpoint.
/// Fewer than `order` nodes collapse to a single panel of m points.
inline Rule composite(double lo, double hi, int m, std::span<const double> breakpoints = {},
                      int order = 8) {
  if (!(hi > lo)) throw DomainError("composite rule: empty interval");
  if (m < 1) throw DomainError("composite rule: need at least one node");
  if (m < order) return gauss_legendre(m, lo, hi);
  const int panels = std::max(1, m / order);
  std::vector<double> cuts;
  for (int p = 0; p <= panels; ++p) cuts.push_back(lo + (hi - lo) * p / panels);
  for (double b : breakpoints)
    if (b > lo && b < hi) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  const double merge = 1e-9 * (hi - lo);
  std::vector<double> clean{cuts.front()};
  for (double c : cuts)
    if (c - clean.back() > merge) clean.push_back(c);
  clean.back() = hi;

  const Rule base = gauss_legendre(order);
  Rule out;
  for (std::size_t p = 0; p + 1 < clean.size(); ++p) {
    const double mid = 0.5 * (clean[p] + clean[p + 1]), half = 0.5 * (clean[p + 1] - clean[p]);
    for (std::size_t i = 0; i < base.size(); ++i) {
      out.nodes.push_back(mid + half * base.nodes[i]);
      out.weights.push_back(half * base.weights[i]);
    }
  }
  return out;
}

using Point = std::array<double, 3>;

struct BallRule {
  int dimension = 2;
  std::vector<Point> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// Product rule on the ball |y - c| <= radius in R^2 or R^3: Gauss in the
/// radius (with the r^{d-1} Jacobian), uniform in azimuth, Gauss in cos(theta).
inline BallRule ball_rule(int d, int radial, int angular, double radius = 1.0,
                          Point center = {0.0, 0.0, 0.0}) {
  if (d != 2 && d != 3) throw DomainError("ball_rule: dimension must be 2 or 3");
  BallRule out;
  out.dimension = d;
  const Rule rr = gauss_legendre(radial, 0.0, radius);
  const double two_pi = 2.0 * std::numbers::pi;
  if (d == 2) {
    const int nt = angular;
    for (std::size_t i = 0; i < rr.size(); ++i)
      for (int j = 0; j < nt; ++j) {
        const double t = two_pi * (j + 0.5) / nt;
        const double r = rr.nodes[i];
        out.nodes.push_back({center[0] + r * std::cos(t), center[1] + r * std::sin(t), 0.0});
        out.weights.push_back(rr.weights[i] * r * two_pi / nt);
      }
    return out;
  }
  const Rule mu = gauss_legendre(std::max(1, angular / 2));
  const int nphi = angular;
  for (std::size_t i = 0; i < rr.size(); ++i)
    for (std::size_t k = 0; k < mu.size(); ++k)
      for (int j = 0; j < nphi; ++j) {
        const double r = rr.nodes[i];
        const double ct = mu.nodes[k], st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        const double ph = two_pi * (j + 0.5) / nphi;
        out.nodes.push_back({center[0] + r * ct, center[1] + r * st * std::cos(ph),
                             center[2] + r * st * std::sin(ph)});
        out.weights.push_back(rr.weights[i] * r * r * mu.weights[k] * two_pi / nphi);
      }
  return out;
}

} // namespace betacrit::quadrature
