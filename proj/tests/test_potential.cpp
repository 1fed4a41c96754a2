#include <gtest/gtest.h>

#include <random>

#include "dnbody/bernoulli.hpp"
#include "dnbody/estimates.hpp"
#include "dnbody/potential.hpp"
#include "dnbody/quadrature.hpp"
#include "test_support.hpp"

using namespace dnbody;
using dnbody::testing::bodies;
using dnbody::testing::brute_force_potential;

namespace {
Vec3 point_on_sphere(double a, double phi, double theta) {
  return a * Vec3(std::cos(phi) * std::cos(theta), std::cos(phi) * std::sin(theta), std::sin(phi));
}
}  // namespace

TEST(Quadrature, GaussLegendreIsExactForPolynomials) {
  for (int n : {1, 2, 5, 16, 128}) {
    const auto r = gauss_legendre(n);
    double wsum = 0.0;
    for (double w : r.w) wsum += w;
    EXPECT_NEAR(wsum, 2.0, 1e-14);
    const int deg = std::min(2 * n - 1, 30);
    for (int k = 0; k <= deg; ++k) {
      const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
      EXPECT_NEAR(integrate_gauss([k](double x) { return std::pow(x, k); }, -1, 1, n), exact,
                  1e-14);
    }
  }
}

TEST(Quadrature, DoublingConverges) {
  const auto r = integrate_gauss_doubling([](double x) { return std::exp(x); }, 0, 1);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, std::exp(1.0) - 1.0, 1e-14);
}

TEST(Bernoulli, KnownValues) {
  const auto b = bernoulli_numbers(12);
  EXPECT_EQ(b[0], (Rational{1, 1}));
  EXPECT_EQ(b[2], (Rational{1, 6}));
  EXPECT_EQ(b[4], (Rational{-1, 30}));
  EXPECT_EQ(b[6], (Rational{1, 42}));
  EXPECT_EQ(b[8], (Rational{-1, 30}));
  EXPECT_EQ(b[10], (Rational{5, 66}));
  EXPECT_EQ(b[12], (Rational{-691, 2730}));
  for (int k = 3; k <= 11; k += 2) EXPECT_EQ(b[k].num, 0);
  EXPECT_THROW(bernoulli_numbers(13), DomainError);
}

TEST(CscSum, Examples) {
  EXPECT_DOUBLE_EQ(harmonic_csc_sum(2), 0.5);
  EXPECT_NEAR(harmonic_csc_sum(4), 0.5 * (2 * std::sqrt(2.0) + 1), 1e-15);
  EXPECT_NEAR(harmonic_csc_sum(4), 1.91421, 1e-5);
  EXPECT_NEAR(harmonic_csc_sum(8), 5.60973, 1e-5);
  EXPECT_LT(2 * harmonic_csc_sum(8), 24.0);
  EXPECT_THROW(harmonic_csc_sum(1), DomainError);
}

TEST(CscBound, ExamplesAndScan) {
  const auto b8 = csc_bound_holds(8);
  EXPECT_NEAR(b8.bound, 6.7651, 1e-4);
  EXPECT_TRUE(b8.holds());
  const auto b2 = csc_bound_holds(2);
  EXPECT_NEAR(b2.bound, 0.8087, 1e-4);
  EXPECT_DOUBLE_EQ(b2.value, 0.5);
  for (int m = 2; m <= 10000; ++m) ASSERT_TRUE(csc_bound_holds(m).holds()) << "m=" << m;
}

TEST(CscAsymptotic, Accuracy) {
  for (int m = 50; m <= 2000; m += 13)
    EXPECT_LT(std::abs(csc_sum_asymptotic(m, 3) / harmonic_csc_sum(m) - 1.0), 1e-10) << m;
  // leading term at m = 8 evaluates to 5.615176 (see notes), within 0.1% of C_8
  EXPECT_NEAR(csc_sum_asymptotic(8, 0), 5.615176, 1e-6);
  EXPECT_LT(std::abs(csc_sum_asymptotic(8, 0) / harmonic_csc_sum(8) - 1.0), 1e-3);
  for (int m = 4; m <= 1000; ++m) EXPECT_LT(csc_sum_asymptotic(m, 0), csc_bound_holds(m).bound);
  EXPECT_THROW(csc_sum_asymptotic(8, 7), DomainError);
}

TEST(Direct, MatchesBruteForceAtEquator) {
  const int l = 4;
  const double theta = kPi / (2 * l);
  const double u = evaluate_direct({1.0, 0.0, theta}, l);
  EXPECT_NEAR(u, brute_force_potential(bodies(point_on_sphere(1, 0, theta), l)), 1e-12 * u);
}

TEST(Direct, MatchesBruteForceRandom) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ua(0.3, 3), uphi(-1.4, 1.4), uth(-3, 3);
  std::uniform_int_distribution<int> ul(2, 6);
  for (int i = 0; i < 100; ++i) {
    const double a = ua(rng), phi = uphi(rng), theta = uth(rng);
    const int l = ul(rng);
    const double u = evaluate_direct({a, phi, theta}, l);
    EXPECT_NEAR(u, brute_force_potential(bodies(point_on_sphere(a, phi, theta), l)), 1e-12 * u);
  }
}

TEST(Direct, Symmetries) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> uphi(0.05, 1.4), uth(-3, 3);
  for (int l = 2; l <= 8; ++l)
    for (int i = 0; i < 10; ++i) {
      const double phi = uphi(rng), th = uth(rng);
      const double u = evaluate_direct({1.0, phi, th}, l);
      EXPECT_NEAR(evaluate_direct({1.0, phi, th + kPi / l}, l), u, 1e-12 * u);
      EXPECT_NEAR(evaluate_direct({1.0, phi, -th}, l), u, 1e-12 * u);
      EXPECT_NEAR(evaluate_direct({1.0, -phi, th}, l), u, 1e-12 * u);
      EXPECT_NEAR(evaluate_direct({2.5, phi, th}, l), u / 2.5, 1e-14 * u);
    }
}

TEST(Direct, CollisionCarriesIndex) {
  try {
    evaluate_direct({1.0, 0.0, 0.0}, 4);
    FAIL() << "expected SingularityError";
  } catch (const SingularityError& e) {
    EXPECT_GE(e.index(), 1);
    EXPECT_LE(e.index(), 4);
  }
  EXPECT_THROW(evaluate_direct({1.0, kPi / 2, 0.3}, 3), SingularityError);
}

TEST(RForm, MatchesDirect) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> uphi(1e-3, 1.5), uth(-3, 3), ua(0.2, 4);
  for (int i = 0; i < 500; ++i) {
    const int l = 2 + i % 11;
    const PotentialPoint p{ua(rng), uphi(rng), uth(rng)};
    const double d = evaluate_direct(p, l);
    EXPECT_NEAR(evaluate_r_form(p.a, p.r(), p.theta, l), d, 1e-12 * d);
  }
}

TEST(RForm, EquatorAndPolarRegime) {
  for (int l = 2; l <= 8; ++l) {
    const double th = kPi / (2 * l);
    const double u1 = evaluate_r_form(1.0, 1.0, th, l);
    EXPECT_NEAR(u1, evaluate_direct({1.0, 0.0, th}, l), 1e-12 * u1);
    double sum = 0.0;
    for (int j = 1; j <= l; ++j) sum += 1.0 / std::abs(1.0 - std::polar(1.0, 2.0 * (kPi * j / l - th)));
    EXPECT_NEAR(u1, 2 * l / 2.0 * (harmonic_csc_sum(l) + sum), 1e-12 * u1);
    for (double r : {1e-2, 1e-4, 1e-6})
      EXPECT_GT(evaluate_r_form(1.0, r, 0.0, l), 2 * l * harmonic_csc_sum(l) / (4 * std::sqrt(r)));
  }
  EXPECT_THROW(evaluate_r_form(1.0, 0.0, 0.1, 3), DomainError);
  EXPECT_THROW(evaluate_r_form(1.0, 1.5, 0.1, 3), DomainError);
}

TEST(IntegralForm, TriadAgreement) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ur(0.05, 0.95), uth(-3, 3);
  for (int i = 0; i < 1000; ++i) {
    const int l = 2 + i % 9;
    const double r = ur(rng), th = uth(rng);
    const double rf = evaluate_r_form(1.0, r, th, l);
    EXPECT_NEAR(evaluate_integral_form(1.0, r, th, l), rf, 1e-10 * rf);
  }
}

TEST(IntegralForm, DomainAndSmallR) {
  EXPECT_THROW(evaluate_integral_form(1.0, 1.0, 0.2, 3), DomainError);
  for (int l = 2; l <= 8; ++l) {
    EXPECT_TRUE(std::isfinite(evaluate_integral_form(1.0, 0.9, kPi / (2 * l), l)));
    const double r = 1e-8, n = 2 * l;
    const double u = evaluate_integral_form(1.0, r, 0.3, l);
    const double bracket = u * 4 * std::sqrt(r) / (n * (1 + r));
    const double slope = (bracket - harmonic_csc_sum(l)) / std::sqrt(r);
    EXPECT_NEAR(slope, l, 0.01 * l);
  }
}

TEST(ThetaMonotone, WitnessNegative) {
  EXPECT_LT(theta_monotone_witness(1.0, 0.3, 4, 100).max_derivative, 0.0);
  EXPECT_LT(theta_monotone_witness(1.0, 0.5, 2, 100).max_derivative, 0.0);
  for (int l = 2; l <= 8; ++l)
    for (double phi = 0.1; phi < 1.45; phi += 0.1)
      EXPECT_LT(theta_monotone_witness(1.0, phi, l, 50).max_derivative, 0.0)
          << "l=" << l << " phi=" << phi;
  EXPECT_THROW(theta_monotone_witness(1.0, 0.0, 3, 10), DomainError);
}

TEST(ThetaMonotone, DerivativeMatchesFiniteDifferenceOfDirect) {
  for (int l = 2; l <= 6; ++l)
    for (double phi : {0.05, 0.2, 0.4})
      for (double th : {0.1, 0.3, 0.6}) {
        const double t = th * kPi / (2 * l) / 0.7;
        const double eps = 1e-5;
        const double fd = (evaluate_direct({1.0, phi, t + eps}, l) -
                           evaluate_direct({1.0, phi, t - eps}, l)) / (2 * eps);
        const double an = dU_dtheta(1.0, PotentialPoint{1.0, phi, t}.r(), t, l);
        EXPECT_NEAR(an, fd, 1e-6 * std::max(1.0, std::abs(fd))) << l << " " << phi << " " << t;
      }
}

TEST(ThetaMonotone, CriticalAtHalfAngle) {
  for (int l = 2; l <= 8; ++l) {
    const double t = kPi / (2 * l), eps = 1e-5, phi = 0.3;
    const double fd = (evaluate_direct({1.0, phi, t + eps}, l) -
                       evaluate_direct({1.0, phi, t - eps}, l)) / (2 * eps);
    EXPECT_NEAR(fd, 0.0, 1e-8);
    EXPECT_NEAR(dU_dtheta(1.0, PotentialPoint{1.0, phi, t}.r(), t, l), 0.0, 1e-10);
  }
}

TEST(PhiSign, LimitMonotoneAndSign) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uphi(0.05, 1.5), uth(0.0, 1.0);
  for (int l = 2; l <= 8; ++l) {
    EXPECT_NEAR(phi_sign_function(0.2, kPi / 2 - 1e-7, l), harmonic_csc_sum(l), 1e-6);
    for (double th : {0.0, 0.1, kPi / (2 * l)}) {
      double prev = phi_sign_function(th, 0.01, l);
      for (double phi = 0.02; phi < 1.56; phi += 0.01) {
        const double f = phi_sign_function(th, phi, l);
        EXPECT_GE(f - prev, -1e-12);
        prev = f;
      }
    }
    for (int i = 0; i < 20; ++i) {
      const double phi = uphi(rng), th = uth(rng) * kPi / l, eps = 1e-6;
      const double f = phi_sign_function(th, phi, l);
      const double du = (evaluate_direct({1.0, phi + eps, th}, l) -
                         evaluate_direct({1.0, phi - eps, th}, l)) / (2 * eps);
      if (std::abs(f) > 1e-6 && std::abs(du) > 1e-6) EXPECT_EQ(f > 0, du > 0);
    }
  }
}

TEST(PolarBound, Examples) {
  const auto b8 = polar_bound_check(8);
  EXPECT_NEAR(b8.bound, 27.06, 0.01);
  EXPECT_TRUE(b8.holds());
  EXPECT_LT(b8.value, 24.0);
  for (int n = 8; n <= 200; n += 2) EXPECT_TRUE(polar_bound_check(n).holds()) << n;
  EXPECT_THROW(polar_bound_check(6), DomainError);
  EXPECT_THROW(polar_bound_check(9), DomainError);
}

TEST(SphericalLoop, PotentialBelowMaxOfCorners) {
  for (auto [n, s] : {std::pair{8, 1}, {10, 2}, {14, 3}, {26, 6}}) {
    const auto p = SymmetryParams::make(n, s);
    const auto tl = test_loop_spherical(p, 256);
    const double a = tl.radius;
    const int l = p.l;
    const double cap = std::max(evaluate_direct({a, 0.0, kPi / (2 * l)}, l),
                                evaluate_direct({a, kPi / (2 * l), 0.0}, l));
    for (const auto& x : tl.loop.nodes()) {
      const double phi = std::asin(std::clamp(x.z() / a, -1.0, 1.0));
      const double th = std::atan2(x.y(), x.x());
      EXPECT_LE(evaluate_direct({a, phi, th}, l), cap * (1 + 1e-12));
    }
  }
}
