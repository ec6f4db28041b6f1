#pragma once

// Exponentially scaled modified Bessel functions I_nu, K_nu for real nu >= 0
// and x > 0. K_mu (|mu| <= 1/2) comes from Temme's series for x < 2 and
// Steed's continued fraction for x >= 2; I_nu follows from the Wronskian
// I_nu K_{nu+1} + I_{nu+1} K_nu = 1/x with the ratio I_{nu+1}/I_nu from a
// continued fraction. Relative accuracy is about 1e-14 across the range.

#include <cmath>
#include <limits>
#include <numbers>

#include "betacrit/errors.hpp"

namespace betacrit::bessel {

struct ScaledPair {
  double i_nu;   ///< I_nu(x) e^{-x}
  double i_nu1;  ///< I_{nu+1}(x) e^{-x}
  double k_nu;   ///< K_nu(x) e^{x}
  double k_nu1;  ///< K_{nu+1}(x) e^{x}

  /// Scaled derivatives, from I'_nu = I_{nu+1} + (nu/x) I_nu and
  /// K'_nu = -K_{nu+1} + (nu/x) K_nu.
  double di_nu(double nu, double x) const { return i_nu1 + nu / x * i_nu; }
  double dk_nu(double nu, double x) const { return -k_nu1 + nu / x * k_nu; }
};

namespace detail {

// gam1 = (1/G(1-mu) - 1/G(1+mu)) / (2 mu), gam2 = (1/G(1-mu) + 1/G(1+mu)) / 2
inline void temme_gammas(double mu, double& gam1, double& gam2, double& gampl, double& gammi) {
  constexpr double euler = std::numbers::egamma;
  if (std::abs(mu) < 1e-5) {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double c2 = euler * euler / 2.0 - pi2 / 12.0;
    const double c3 = euler * euler * euler / 6.0 - euler * pi2 / 12.0 + 1.2020569031595942 / 3.0;
    gam1 = -(euler + c3 * mu * mu);
    gam2 = 1.0 + c2 * mu * mu;
  } else {
    const double a = 1.0 / std::tgamma(1.0 - mu), b = 1.0 / std::tgamma(1.0 + mu);
    gam1 = (a - b) / (2.0 * mu);
    gam2 = 0.5 * (a + b);
  }
  gampl = gam2 - mu * gam1; // 1/G(1+mu)
  gammi = gam2 + mu * gam1; // 1/G(1-mu)
}

} // namespace detail

inline ScaledPair scaled(double nu, double x) {
  if (!(x > 0.0)) throw DomainError("modified Bessel: argument must be positive");
  if (nu < 0.0) throw DomainError("modified Bessel: order must be nonnegative");
  constexpr double eps = 1e-16;
  constexpr double fpmin = std::numeric_limits<double>::min() / eps;
  constexpr int max_iter = 100000;
  const double pi = std::numbers::pi;

  const int nl = static_cast<int>(nu + 0.5);
  const double mu = nu - nl;
  const double mu2 = mu * mu;
  const double xi = 1.0 / x, xi2 = 2.0 * xi;

  // CF1 for f = I'_nu / I_nu (modified Lentz)
  double h = nu * xi;
  if (h < fpmin) h = fpmin;
  double b = xi2 * nu, d = 0.0, c = h;
  int it = 0;
  for (; it < max_iter; ++it) {
    b += xi2;
    d = 1.0 / (b + d);
    c = b + 1.0 / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  if (it == max_iter) throw NumericalError("unconverged", "modified Bessel CF1 did not converge");

  // downward recurrence of I to order mu (unnormalised)
  double ril = fpmin, ripl = h * ril;
  const double ril1 = ril;
  double fact = nu * xi;
  for (int l = nl; l >= 1; --l) {
    const double ritemp = fact * ril + ripl;
    fact -= xi;
    ripl = fact * ritemp + ril;
    ril = ritemp;
  }
  const double f = ripl / ril;

  double kmu, k1; // scaled by e^{x}
  if (x < 2.0) {
    const double x2 = 0.5 * x;
    const double pimu = pi * mu;
    const double fct = std::abs(pimu) < eps ? 1.0 : pimu / std::sin(pimu);
    d = -std::log(x2);
    double e = mu * d;
    const double fct2 = std::abs(e) < eps ? 1.0 : std::sinh(e) / e;
    double gam1, gam2, gampl, gammi;
    detail::temme_gammas(mu, gam1, gam2, gampl, gammi);
    double ff = fct * (gam1 * std::cosh(e) + gam2 * fct2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / gampl;
    double q = 0.5 / (e * gammi);
    c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    int i = 1;
    for (; i < max_iter; ++i) {
      ff = (i * ff + p + q) / (i * i - mu2);
      c *= d / i;
      p /= (i - mu);
      q /= (i + mu);
      const double del = c * ff;
      sum += del;
      sum1 += c * (p - i * ff);
      if (std::abs(del) < std::abs(sum) * eps) break;
    }
    if (i == max_iter) throw NumericalError("unconverged", "modified Bessel series did not converge");
    const double ex = std::exp(x);
    kmu = sum * ex;
    k1 = sum1 * xi2 * ex;
  } else {
    // Steed's CF2
    b = 2.0 * (1.0 + x);
    d = 1.0 / b;
    double delh = d;
    h = d;
    double q1 = 0.0, q2 = 1.0;
    const double a1 = 0.25 - mu2;
    double q = a1;
    c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    int i = 2;
    for (; i < max_iter; ++i) {
      a -= 2.0 * (i - 1);
      c = -a * c / i;
      const double qnew = (q1 - b * q2) / a;
      q1 = q2;
      q2 = qnew;
      q += c * qnew;
      b += 2.0;
      d = 1.0 / (b + a * d);
      delh = (b * d - 1.0) * delh;
      h += delh;
      const double dels = q * delh;
      s += dels;
      if (std::abs(dels / s) < eps) break;
    }
    if (i == max_iter) throw NumericalError("unconverged", "modified Bessel CF2 did not converge");
    h = a1 * h;
    kmu = std::sqrt(pi / (2.0 * x)) / s;
    k1 = kmu * (mu + x + 0.5 - h) * xi;
  }

  const double kmup = mu * xi * kmu - k1;
  const double imu = xi / (f * kmu - kmup);
  const double inu = imu * ril1 / ril;
  for (int i = 1; i <= nl; ++i) {
    const double t = (mu + i) * xi2 * k1 + kmu;
    kmu = k1;
    k1 = t;
  }
  // kmu = K_nu, k1 = K_{nu+1}; I_{nu+1}/I_nu = 1/(b1 + 1/(b2 + ...)), b_j = 2(nu+j)/x,
  // which avoids the cancellation in I'_nu - (nu/x) I_nu at small x
  double cf = 2.0 * (nu + 1.0) * xi;
  double cc = cf, dd = 0.0;
  int j = 2;
  for (; j < max_iter; ++j) {
    const double bj = 2.0 * (nu + j) * xi;
    dd = bj + dd;
    if (dd == 0.0) dd = fpmin;
    cc = bj + 1.0 / cc;
    if (cc == 0.0) cc = fpmin;
    dd = 1.0 / dd;
    const double del = cc * dd;
    cf *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  if (j == max_iter) throw NumericalError("unconverged", "modified Bessel ratio did not converge");
  return ScaledPair{inu, inu / cf, kmu, k1};
}

/// Unscaled conveniences (overflow for large x).
inline double bessel_i(double nu, double x) { return scaled(nu, x).i_nu * std::exp(x); }
inline double bessel_k(double nu, double x) { return scaled(nu, x).k_nu * std::exp(-x); }

} // namespace betacrit::bessel
