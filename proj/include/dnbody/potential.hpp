#pragma once

// Potential of two twisted regular l-gons on a sphere of radius a: the bodies
// are R_j u_0 with u_0 = a (cos phi cos theta, cos phi sin theta, sin phi).
// Closed forms in (phi, theta), in (r, xi = e^{-2i theta}), and through the
// integral representation, plus the csc-sum bounds they rely on.

#include <cmath>
#include <complex>
#include <limits>
#include <algorithm>
#include <string>

#include "dnbody/bernoulli.hpp"
#include "dnbody/errors.hpp"
#include "dnbody/quadrature.hpp"
#include "dnbody/symmetry.hpp"

namespace dnbody {

inline constexpr double kCollisionThreshold = 1e-13;

/// C_m = (1/2) sum_{j=1}^{m-1} csc(j pi / m)
inline double harmonic_csc_sum(int m) {
  if (m < 2) throw DomainError("harmonic_csc_sum: m must be >= 2");
  double sum = 0.0;
  for (int j = 1; j < m; ++j) sum += 1.0 / std::sin(kPi * j / m);
  return 0.5 * sum;
}

struct CscBound {
  double value;  // C_m
  double bound;  // (m / pi)(log m + gamma)
  double margin() const { return bound - value; }
  bool holds() const { return margin() > 0.0; }
};

inline CscBound csc_bound_holds(int m) {
  return {harmonic_csc_sum(m), m / kPi * (std::log(static_cast<double>(m)) + kEulerGamma)};
}

/// Large-m expansion of C_m truncated after K correction terms (K <= 6).
inline double csc_sum_asymptotic(int m, int K) {
  if (m < 2) throw DomainError("csc_sum_asymptotic: m must be >= 2");
  if (K < 0 || K > 6) throw DomainError("csc_sum_asymptotic: K must be in [0, 6]");
  const double mm = m;
  double sum = mm / kPi * (kEulerGamma + std::log(2.0 * mm / kPi));
  double factorial = 1.0;  // (2k)!
  for (int k = 1; k <= K; ++k) {
    factorial *= (2.0 * k - 1.0) * (2.0 * k);
    const double b = bernoulli_b2k(k);
    const double sign = k % 2 ? -1.0 : 1.0;
    sum += 2.0 * sign * (std::pow(2.0, 2 * k - 1) - 1.0) * b * b *
           std::pow(kPi, 2 * k - 1) / (2.0 * k * factorial) / std::pow(mm, 2 * k - 1);
  }
  return sum;
}

struct PotentialPoint {
  double a;      // sphere radius
  double phi;    // latitude in (-pi/2, pi/2)
  double theta;  // longitude

  /// r = (1 - sin|phi|) / (1 + sin|phi|), in (0, 1]
  double r() const {
    const double s = std::sin(std::abs(phi));
    return (1.0 - s) / (1.0 + s);
  }
  std::complex<double> xi() const { return std::polar(1.0, -2.0 * theta); }
};

/// U = n / (4 a cos phi) { 2 C_l + sum_{j=1}^{l} [sin^2(j pi/l - theta) + tan^2 phi]^{-1/2} }
inline double evaluate_direct(const PotentialPoint& p, int l) {
  if (l < 2) throw DomainError("evaluate_direct: l must be >= 2");
  const int n = 2 * l;
  const double c = std::cos(p.phi);
  if (2.0 * c * std::sin(kPi / l) < kCollisionThreshold)
    throw SingularityError("evaluate_direct: polygon collapsed onto the xi_3 axis", 0);
  const double tan2 = std::tan(p.phi) * std::tan(p.phi);
  double sum = 0.0;
  for (int j = 1; j <= l; ++j) {
    const double sj = std::sin(kPi * j / l - p.theta);
    const double d2 = sj * sj + tan2;
    // physical separation in units of a is 2 cos(phi) sqrt(d2)
    if (2.0 * c * std::sqrt(d2) < kCollisionThreshold)
      throw SingularityError("evaluate_direct: polygons collide", j);
    sum += 1.0 / std::sqrt(d2);
  }
  return n / (4.0 * p.a * c) * (2.0 * harmonic_csc_sum(l) + sum);
}

/// U = n (1 + r) / (4 a sqrt r) (C_l + sqrt r sum_{j=1}^{l} |1 - r xi xi_l^j|^{-1})
inline double evaluate_r_form(double a, double r, double theta, int l) {
  if (l < 2) throw DomainError("evaluate_r_form: l must be >= 2");
  if (!(r > 0.0 && r <= 1.0)) throw DomainError("evaluate_r_form: r must be in (0, 1]");
  const int n = 2 * l;
  const double sr = std::sqrt(r);
  double sum = 0.0;
  for (int j = 1; j <= l; ++j) {
    // r xi xi_l^j = r e^{2i (j pi / l - theta)}
    const double d = std::abs(1.0 - std::polar(r, 2.0 * (kPi * j / l - theta)));
    if (d < kCollisionThreshold) throw SingularityError("evaluate_r_form: polygons collide", j);
    sum += 1.0 / d;
  }
  return n * (1.0 + r) / (4.0 * a * sr) * (harmonic_csc_sum(l) + sr * sum);
}

struct IntegralFormResult {
  double value;
  int points;  // quadrature size at acceptance
};

namespace detail {
// Integrand after t = sin^2 psi; the factor (1-t)^{-1/2} t^{-1/2} dt becomes 2 dpsi.
inline double integral_kernel(double psi, double r, double theta, int l) {
  const double s = std::sin(psi);
  const double t = s * s;
  const double q = std::pow(t * r, l);
  const double den = 1.0 + q * q - 2.0 * q * std::cos(2.0 * l * theta);
  return 2.0 / std::sqrt(1.0 - t * r * r) * (1.0 - q * q) / den;
}

inline double integral_kernel_dtheta(double psi, double r, double theta, int l) {
  const double s = std::sin(psi);
  const double t = s * s;
  const double q = std::pow(t * r, l);
  const double den = 1.0 + q * q - 2.0 * q * std::cos(2.0 * l * theta);
  return 2.0 / std::sqrt(1.0 - t * r * r) * (1.0 - q * q) *
         (-4.0 * l * q * std::sin(2.0 * l * theta)) / (den * den);
}
}  // namespace detail

/// U through the integral representation of sum_j |1 - r xi xi_l^j|^{-1}, r in (0, 1).
inline IntegralFormResult evaluate_integral_form_detailed(double a, double r, double theta, int l,
                                                          int quad_points = 128) {
  if (l < 2) throw DomainError("evaluate_integral_form: l must be >= 2");
  if (!(r > 0.0 && r < 1.0)) throw DomainError("evaluate_integral_form: r must be in (0, 1)");
  const int n = 2 * l;
  const auto integral = integrate_gauss_doubling(
      [&](double psi) { return detail::integral_kernel(psi, r, theta, l); }, 0.0, kPi / 2,
      quad_points, std::max(quad_points, 1024));
  const double sr = std::sqrt(r);
  const double bracket = harmonic_csc_sum(l) + l * sr / kPi * integral.value;
  return {n * (1.0 + r) / (4.0 * a * sr) * bracket, integral.points};
}

inline double evaluate_integral_form(double a, double r, double theta, int l,
                                     int quad_points = 128) {
  return evaluate_integral_form_detailed(a, r, theta, l, quad_points).value;
}

/// dU/dtheta at fixed r, by differentiating the integral representation under
/// the integral sign. Every quadrature term carries the sign of -sin(2 l theta).
inline double dU_dtheta(double a, double r, double theta, int l, int quad_points = 128) {
  if (!(r > 0.0 && r < 1.0)) throw DomainError("dU_dtheta: r must be in (0, 1)");
  const int n = 2 * l;
  const auto integral = integrate_gauss_doubling(
      [&](double psi) { return detail::integral_kernel_dtheta(psi, r, theta, l); }, 0.0,
      kPi / 2, quad_points, std::max(quad_points, 1024));
  const double sr = std::sqrt(r);
  return n * (1.0 + r) / (4.0 * a * sr) * (l * sr / kPi) * integral.value;
}

struct MonotoneWitness {
  double max_derivative;  // max over the grid of dU/dtheta, expected < 0
  double argmax_theta;
};

/// Scans theta_k = k/(grid+1) * pi/(2l), k = 1..grid, at fixed phi in (0, pi/2).
inline MonotoneWitness theta_monotone_witness(double a, double phi, int l, int grid) {
  if (!(phi > 0.0 && phi < kPi / 2))
    throw DomainError("theta_monotone_witness: phi must be in (0, pi/2)");
  if (grid < 1) throw DomainError("theta_monotone_witness: grid must be >= 1");
  const double r = PotentialPoint{a, phi, 0.0}.r();
  MonotoneWitness w{-std::numeric_limits<double>::infinity(), 0.0};
  for (int k = 1; k <= grid; ++k) {
    const double theta = kPi / (2.0 * l) * k / (grid + 1.0);
    const double d = dU_dtheta(a, r, theta, l);
    if (d > w.max_derivative) w = {d, theta};
  }
  return w;
}

/// f_theta(phi) = C_l - (1/2) sum_j cos^2(j pi/l - theta) / (sin^2(j pi/l - theta) + tan^2 phi)^{3/2};
/// dU/dphi = (n / a) sin(phi) / cos^2(phi) * f_theta(phi).
inline double phi_sign_function(double theta, double phi, int l) {
  if (!(phi > 0.0 && phi < kPi / 2))
    throw DomainError("phi_sign_function: phi must be in (0, pi/2)");
  const double tan2 = std::tan(phi) * std::tan(phi);
  double sum = 0.0;
  for (int j = 1; j <= l; ++j) {
    const double x = kPi * j / l - theta;
    const double s = std::sin(x), c = std::cos(x);
    sum += c * c / std::pow(s * s + tan2, 1.5);
  }
  return harmonic_csc_sum(l) - 0.5 * sum;
}

struct PolarBound {
  double value;  // U(phi = pi/n, theta = 0) at a = 1
  double bound;  // n^2 / (2 pi) (log n + gamma)
  double margin() const { return bound - value; }
  bool holds() const { return margin() > 0.0; }
};

inline PolarBound polar_bound_check(int n) {
  if (n < 8 || n % 2 != 0) throw DomainError("polar_bound_check: n must be even and >= 8");
  const double value = evaluate_direct({1.0, kPi / n, 0.0}, n / 2);
  const double nn = n;
  return {value, nn * nn / (2.0 * kPi) * (std::log(nn) + kEulerGamma)};
}

}  // namespace dnbody
