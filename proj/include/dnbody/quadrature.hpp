#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include "dnbody/errors.hpp"

namespace dnbody {

struct GaussRule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

/// n-point Gauss-Legendre rule by Newton iteration on P_n.
inline GaussRule gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: n must be >= 1");
  GaussRule r{std::vector<double>(n), std::vector<double>(n)};
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
  return r;
}

/// Cached rule; rules are immutable once built.
inline const GaussRule& cached_gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gauss_legendre(n)).first;
  return it->second;
}

template <typename F>
double integrate_gauss(F&& f, double a, double b, int n) {
  const auto& rule = cached_gauss_legendre(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rule.w[i] * f(mid + half * rule.x[i]);
  return half * sum;
}

struct AdaptiveResult {
  double value;
  int points;
  bool converged;
};

/// Doubles the rule size from `start` until successive values agree to `tol`
/// (absolute, scaled by max(1, |value|)) or `cap` is reached.
template <typename F>
AdaptiveResult integrate_gauss_doubling(F&& f, double a, double b, int start = 128,
                                        int cap = 1024, double tol = 1e-12) {
  int n = start;
  double prev = integrate_gauss(f, a, b, n);
  while (n < cap) {
    n *= 2;
    const double cur = integrate_gauss(f, a, b, n);
    if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur))) return {cur, n, true};
    prev = cur;
  }
  return {prev, n, false};
}

}  // namespace dnbody
