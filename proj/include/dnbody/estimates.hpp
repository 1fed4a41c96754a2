#pragma once

// Level estimates excluding total collisions: the action floor B of any
// symmetric loop with a total collision, and two explicit collision-free test
// loops whose actions sit below it.

#include <cmath>
#include <string>
#include <vector>

#include "dnbody/action.hpp"
#include "dnbody/errors.hpp"
#include "dnbody/loops.hpp"
#include "dnbody/symmetry.hpp"

namespace dnbody {

/// Minimal Kepler-type action of an arc leaving and returning to the origin in [t1, t2]:
/// (3/2)(2 pi)^{2/3} a^{2/3} (t2 - t1)^{1/3}.
inline double gordon_bound(double a, double t1, double t2) {
  if (!(a > 0.0)) throw DomainError("gordon_bound: a must be positive");
  if (!(t2 > t1)) throw DomainError("gordon_bound: need t2 > t1");
  return 1.5 * std::pow(2.0 * kPi, 2.0 / 3.0) * std::pow(a, 2.0 / 3.0) * std::cbrt(t2 - t1);
}

/// B = (3(n-1)/4) (2h)^{2/3} pi^{2/3} n^{2/3} T^{1/3}
inline double total_collision_lower_bound(const SymmetryParams& p) {
  const double n = p.n;
  return 0.75 * (n - 1.0) * std::pow(2.0 * p.h * kPi * n, 2.0 / 3.0) * std::cbrt(p.T);
}

enum class TestLoopKind { s1_circles, spherical };

inline std::string to_string(TestLoopKind k) {
  return k == TestLoopKind::s1_circles ? "s1_circles" : "spherical";
}

struct TestLoop {
  GeneratingLoop loop;
  double A_bound;
  double radius;  // circle offset r (s1_circles) or sphere radius a (spherical)
};

/// Constant-speed loop on two quarter circles of radius r tan(pi/n); s = 1 only.
/// u_0(0) is the lowest point of the first circle; the arcs meet on xi_3 = 0 at T/4h.
inline TestLoop test_loop_s1(const SymmetryParams& p, int N) {
  if (p.s != 1) throw DomainError("test_loop_s1: requires s = 1");
  if (N < 2) throw DomainError("test_loop_s1: N must be >= 2");
  const double n = p.n, h = p.h, T = p.T;
  const double beta = kPi / n;  // half the polygon angle pi/l
  const double r = std::cbrt(n - 1.0) * std::pow(T, 2.0 / 3.0) /
                   (std::cbrt(16.0 * h * h) * std::tan(beta) * std::pow(kPi, 2.0 / 3.0));
  const double rho = r * std::tan(beta);
  const Vec3 c2(r * std::cos(2 * beta), r * std::sin(2 * beta), 0.0);
  const Vec3 w(std::sin(2 * beta), -std::cos(2 * beta), 0.0);  // from c2 toward the join

  std::vector<Vec3> nodes(N + 1);
  for (int i = 0; i <= N; ++i) {
    const double frac = static_cast<double>(i) / N;  // t / (T/2h)
    if (2 * i <= N) {
      const double alpha = kPi * frac;  // 0 .. pi/2 on the first arc
      nodes[i] = Vec3(r, rho * std::sin(alpha), -rho * std::cos(alpha));
    } else {
      const double g = kPi * (frac - 0.5);
      nodes[i] = c2 + rho * (std::cos(g) * w + std::sin(g) * Vec3::UnitZ());
    }
  }
  nodes[0][1] = 0.0;
  const double A_bound = 0.75 * std::cbrt(2.0 * h * h) * n * std::pow(n - 1.0, 2.0 / 3.0) *
                         std::pow(kPi, 2.0 / 3.0) * std::cbrt(T);
  return {GeneratingLoop(p, std::move(nodes)), A_bound, r};
}

/// Constant-speed loop on the sphere |u_0| = a: along the lower latitude -pi/n,
/// up the meridian theta = pi/n, then along latitude +pi/n to theta = s pi/l.
/// With `remark8` (n = 8, s = 2 only) the sharper radius and bound for that case are used.
inline TestLoop test_loop_spherical(const SymmetryParams& p, int N, bool remark8 = false) {
  if (p.n < 8) throw DomainError("test_loop_spherical: requires n >= 8");
  if (p.s < 1 || 2 * p.s > p.l) throw DomainError("test_loop_spherical: requires 1 <= s <= l/2");
  if (remark8 && !(p.n == 8 && p.s == 2))
    throw DomainError("test_loop_spherical: remark8 mode requires n = 8, s = 2");
  if (N < 2) throw DomainError("test_loop_spherical: N must be >= 2");
  const double n = p.n, l = p.l, h = p.h, s = p.s, T = p.T;
  const double L = std::log(n) + kEulerGamma;

  double a, A_bound;
  if (remark8) {
    a = std::pow(3.0, -1.0 / 3.0) * std::pow(kPi, -2.0 / 3.0) * std::pow(T, 2.0 / 3.0);
    A_bound = 36.0 * std::cbrt(3.0) * std::pow(kPi, 2.0 / 3.0) * std::cbrt(T);
  } else {
    a = std::cbrt(n) * std::pow(T, 2.0 / 3.0) * std::cbrt(L) /
        (2.0 * kPi * std::pow(s + 1.0, 2.0 / 3.0)) * std::pow(l / h, 2.0 / 3.0);
    A_bound = 1.5 * std::pow(h / l, 2.0 / 3.0) * std::pow(n, 5.0 / 3.0) * std::pow(L, 2.0 / 3.0) *
              std::pow(s + 1.0, 2.0 / 3.0) * std::cbrt(T);
  }

  const double omega = 2.0 * h * (s + 1.0) * kPi / (l * T);
  const double t1 = T / (4.0 * h * (s + 1.0));
  const double t2 = 3.0 * t1;
  const double tau = p.fundamental_length();
  std::vector<Vec3> nodes(N + 1);
  for (int i = 0; i <= N; ++i) {
    const double t = tau * i / N;
    double phi, theta;
    if (t <= t1) {
      phi = -kPi / n;
      theta = omega * t;
    } else if (t <= t2) {
      phi = omega * t - 2.0 * kPi / n;
      theta = kPi / n;
    } else {
      phi = kPi / n;
      theta = omega * t - 2.0 * kPi / n;
    }
    nodes[i] = a * Vec3(std::cos(phi) * std::cos(theta), std::cos(phi) * std::sin(theta),
                        std::sin(phi));
  }
  nodes[0][1] = 0.0;
  // the schedule ends exactly at theta = s pi / l; snap the last node onto P_s
  nodes[N] = a * (std::cos(kPi / n) * plane_basis(p.l, p.s).first +
                  std::sin(kPi / n) * Vec3::UnitZ());
  return {GeneratingLoop(p, std::move(nodes)), A_bound, a};
}

struct EstimateReport {
  SymmetryParams params;
  bool remark8 = false;
  int N = 0;
  double B = 0.0;
  TestLoopKind kind = TestLoopKind::s1_circles;
  double A_bound = 0.0;
  double A_numeric = 0.0;
  double ratio_bound = 0.0;    // A_bound / B
  double ratio_numeric = 0.0;  // A_numeric / B
  bool verdict = false;        // A_numeric < B
  double margin() const { return B - A_numeric; }
};

/// Test loop for (n, s): the quarter circles when s = 1, otherwise the spherical loop.
inline TestLoop select_test_loop(const SymmetryParams& p, int N, bool remark8 = false) {
  return p.s == 1 && !remark8 ? test_loop_s1(p, N) : test_loop_spherical(p, N, remark8);
}

inline EstimateReport exclusion_report(const SymmetryParams& p, int N = 256,
                                       bool remark8 = false) {
  EstimateReport rep;
  rep.params = p;
  rep.remark8 = remark8;
  rep.N = N;
  rep.B = total_collision_lower_bound(p);
  rep.kind = p.s == 1 && !remark8 ? TestLoopKind::s1_circles : TestLoopKind::spherical;
  const auto tl = select_test_loop(p, N, remark8);
  rep.A_bound = tl.A_bound;
  rep.A_numeric = reduced_action(tl.loop).total;
  rep.ratio_bound = rep.A_bound / rep.B;
  rep.ratio_numeric = rep.A_numeric / rep.B;
  rep.verdict = rep.A_numeric < rep.B;
  return rep;
}

}  // namespace dnbody
