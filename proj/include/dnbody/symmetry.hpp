#pragma once

// Dihedral group D_l acting on R^3, the twist parameters (n, l, s, h, T) and
// the choreography decomposition of the body index set.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "dnbody/errors.hpp"

namespace dnbody {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kEulerGamma = 0.5772156649015328606;
inline constexpr double kPi = std::numbers::pi;

struct GroupElement {
  enum class Kind {
    rotation,    // R_k: rotation by 2k*pi/l about the xi_3 axis
    flip,        // R_{l+k} = R^k S: half-turn about a horizontal axis
    reflection,  // hat R_k: mirror in the vertical plane P_k
  };
  Kind kind;
  int index;
  Mat3 matrix;
};

/// R_k for 0 <= k < l, R_{l+k'} = R^{k'} S for l <= k < 2l.
inline GroupElement rotation(int l, int k) {
  if (l < 2) throw DomainError("rotation: l must be >= 2");
  if (k < 0 || k >= 2 * l) throw DomainError("rotation: k out of [0, 2l)");
  const int kk = k < l ? k : k - l;
  const double ang = 2.0 * kPi * kk / l;
  const double c = std::cos(ang), s = std::sin(ang);
  Mat3 m;
  if (k < l) {
    m << c, -s, 0,
         s,  c, 0,
         0,  0, 1;
    return {GroupElement::Kind::rotation, k, m};
  }
  m << c,  s,  0,
       s, -c,  0,
       0,  0, -1;
  return {GroupElement::Kind::flip, k, m};
}

/// hat R_k, the mirror fixing the plane P_k: xi_2 = xi_1 tan(k pi / l).
inline GroupElement reflection(int l, int k) {
  if (l < 2) throw DomainError("reflection: l must be >= 2");
  if (k < 0 || k >= l) throw DomainError("reflection: k out of [0, l)");
  const double ang = 2.0 * kPi * k / l;
  const double c = std::cos(ang), s = std::sin(ang);
  Mat3 m;
  m << c,  s, 0,
       s, -c, 0,
       0,  0, 1;
  return {GroupElement::Kind::reflection, k, m};
}

/// All n = 2l matrices R_0 .. R_{n-1} in body order.
inline std::vector<Mat3> group_matrices(int l) {
  std::vector<Mat3> out;
  out.reserve(2 * l);
  for (int k = 0; k < 2 * l; ++k) out.push_back(rotation(l, k).matrix);
  return out;
}

/// Least h >= 1 with s*h = 0 (mod l).
inline int minimal_h(int l, int s) {
  if (l < 2) throw DomainError("minimal_h: l must be >= 2");
  if (s < 1 || s > l) throw DomainError("minimal_h: s out of [1, l]");
  return l / std::gcd(l, s);
}

struct SymmetryParams {
  int n = 4;
  int l = 2;
  int s = 1;
  int h = 2;
  double T = 1.0;

  /// Validated parameters: n even >= 4, 1 <= s <= l/2, T > 0.
  static SymmetryParams make(int n, int s, double T = 1.0) {
    auto p = make_relaxed(n, s, T);
    if (2 * s > p.l)
      throw DomainError("SymmetryParams: s = " + std::to_string(s) +
                        " exceeds l/2 = " + std::to_string(p.l / 2));
    return p;
  }

  /// Same as make() but admits any 1 <= s < l (twists s and l - s are
  /// geometrically equivalent; used for choreography bookkeeping and --force).
  static SymmetryParams make_relaxed(int n, int s, double T = 1.0) {
    if (n < 4 || n % 2 != 0)
      throw DomainError("SymmetryParams: n must be even and >= 4");
    if (!(T > 0.0)) throw DomainError("SymmetryParams: T must be positive");
    const int l = n / 2;
    if (s < 1 || s >= l)
      throw DomainError("SymmetryParams: s out of [1, l)");
    return {n, l, s, minimal_h(l, s), T};
  }

  /// Length of the fundamental domain [0, T/2h].
  double fundamental_length() const { return T / (2.0 * h); }

  bool operator==(const SymmetryParams&) const = default;
};

/// Bodies sharing a curve, listed in the order visited at shifts 0, T/h, 2T/h, ...
struct ChoreographyPartition {
  std::vector<std::vector<int>> classes;
};

inline ChoreographyPartition choreography_classes(int l, int s) {
  const int h = minimal_h(l, s);
  const int reps = l / h;
  ChoreographyPartition out;
  // First polygon: u_j -> u_{(j + s) mod l}.
  for (int j = 0; j < reps; ++j) {
    std::vector<int> cls;
    for (int m = 0, idx = j; m < h; ++m, idx = (idx + s) % l) cls.push_back(idx);
    out.classes.push_back(std::move(cls));
  }
  // Second polygon: u_{l+j} -> u_{l + (j - s) mod l}; representatives l, 2l-1, 2l-2, ...
  for (int m = 0; m < reps; ++m) {
    std::vector<int> cls;
    int j = (l - m) % l;
    for (int step = 0; step < h; ++step) {
      cls.push_back(l + j);
      j = ((j - s) % l + l) % l;
    }
    out.classes.push_back(std::move(cls));
  }
  return out;
}

inline ChoreographyPartition choreography_classes(const SymmetryParams& p) {
  return choreography_classes(p.l, p.s);
}

namespace detail {
template <typename Real>
Real twist_bound_impl(int n) {
  const Real nn = static_cast<Real>(n);
  const Real pi = std::numbers::pi_v<Real>;
  const Real gamma = static_cast<Real>(0.57721566490153286060651209008240243L);
  return std::pow((nn - 1) / nn, Real(1.5)) * pi / std::pow(Real(2), Real(1.5)) *
             nn / (std::log(nn) + gamma) -
         Real(1);
}
}  // namespace detail

/// f(n) = ((n-1)/n)^{3/2} pi / 2^{3/2} * n / (log n + gamma) - 1.
inline double twist_bound(int n) { return detail::twist_bound_impl<double>(n); }

/// Largest twist s covered by the existence result for n bodies.
inline int admissible_s_max(int n, bool allow_n8_special = false) {
  if (n < 4 || n % 2 != 0)
    throw DomainError("admissible_s_max: n must be even and >= 4");
  if (allow_n8_special && n == 8) return 2;
  double f = twist_bound(n);
  if (std::abs(f - std::round(f)) < 1e-9) {
    // floor of a near-integer: re-evaluate in extended precision
    const long double fl = detail::twist_bound_impl<long double>(n);
    f = std::abs(fl - std::round(fl)) < 1e-15L ? std::round(static_cast<double>(fl))
                                               : static_cast<double>(std::floor(fl));
  }
  const int s = static_cast<int>(std::floor(std::max(1.0, f)));
  return std::min(s, (n / 2) / 2);
}

}  // namespace dnbody
