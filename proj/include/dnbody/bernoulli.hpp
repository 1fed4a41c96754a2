#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "dnbody/errors.hpp"

namespace dnbody {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t p, std::int64_t q) {
    if (q < 0) p = -p, q = -q;
    const auto g = std::gcd(p < 0 ? -p : p, q);
    return {p / g, q / g};
  }
  friend Rational operator-(Rational a, Rational b) {
    const auto g = std::lcm(a.den, b.den);
    return make(a.num * (g / a.den) - b.num * (g / b.den), g);
  }
  friend Rational operator*(Rational a, std::int64_t k) { return make(a.num * k, a.den); }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

/// B_0 .. B_m exactly, by the Akiyama-Tanigawa algorithm (B_1 = +1/2 convention).
/// 64-bit intermediates are exact through m = 12.
inline std::vector<Rational> bernoulli_numbers(int m) {
  if (m < 0 || m > 12) throw DomainError("bernoulli_numbers: m must be in [0, 12]");
  std::vector<Rational> a(m + 1), out(m + 1);
  for (int k = 0; k <= m; ++k) {
    a[k] = Rational::make(1, k + 1);
    for (int j = k; j >= 1; --j) a[j - 1] = (a[j - 1] - a[j]) * j;
    out[k] = a[0];
  }
  return out;
}

/// B_{2k} as a double, k = 0..6.
inline double bernoulli_b2k(int k) {
  static const std::vector<Rational> table = bernoulli_numbers(12);
  if (k < 0 || k > 6) throw DomainError("bernoulli_b2k: k must be in [0, 6]");
  return table[2 * k].value();
}

}  // namespace dnbody
