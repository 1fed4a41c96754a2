#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "dnbody/symmetry.hpp"

using namespace dnbody;

namespace {
double max_abs(const Mat3& m) { return m.cwiseAbs().maxCoeff(); }
}  // namespace

TEST(Rotation, IdentityAndHalfTurn) {
  EXPECT_LT(max_abs(rotation(2, 0).matrix - Mat3::Identity()), 1e-15);
  Mat3 half = Vec3(-1, -1, 1).asDiagonal();
  EXPECT_LT(max_abs(rotation(2, 1).matrix - half), 1e-15);
}

TEST(Rotation, FlipBlockForL3K4) {
  const double c = std::cos(2 * kPi / 3), s = std::sin(2 * kPi / 3);
  Mat3 expect;
  expect << c, s, 0, s, -c, 0, 0, 0, -1;
  const auto g = rotation(3, 4);
  EXPECT_EQ(g.kind, GroupElement::Kind::flip);
  EXPECT_LT(max_abs(g.matrix - expect), 1e-15);
}

TEST(Rotation, OutOfRange) {
  EXPECT_THROW(rotation(3, 6), DomainError);
  EXPECT_THROW(rotation(3, -1), DomainError);
  EXPECT_THROW(rotation(1, 0), DomainError);
  EXPECT_THROW(reflection(3, 3), DomainError);
}

TEST(Rotation, OrthogonalWithDeterminants) {
  for (int l = 2; l <= 12; ++l) {
    for (int k = 0; k < 2 * l; ++k) {
      const auto g = rotation(l, k);
      EXPECT_LT(max_abs(g.matrix.transpose() * g.matrix - Mat3::Identity()), 1e-14);
      EXPECT_NEAR(g.matrix.determinant(), 1.0, 1e-14);
    }
    for (int k = 0; k < l; ++k) {
      const auto r = reflection(l, k);
      EXPECT_LT(max_abs(r.matrix.transpose() * r.matrix - Mat3::Identity()), 1e-14);
      EXPECT_NEAR(r.matrix.determinant(), -1.0, 1e-14);
    }
  }
}

TEST(Reflection, L2K0) {
  Mat3 expect = Vec3(1, -1, 1).asDiagonal();
  EXPECT_LT(max_abs(reflection(2, 0).matrix - expect), 1e-15);
}

TEST(Reflection, ProductWithHatR0IsRk) {
  for (int l = 2; l <= 12; ++l)
    for (int k = 0; k < l; ++k)
      EXPECT_LT(max_abs(reflection(l, k).matrix * reflection(l, 0).matrix - rotation(l, k).matrix),
                1e-14)
          << "l=" << l << " k=" << k;
}

TEST(Reflection, InvolutionAndFixedPlane) {
  for (int l = 2; l <= 12; ++l)
    for (int k = 0; k < l; ++k) {
      const Mat3 m = reflection(l, k).matrix;
      EXPECT_LT(max_abs(m * m - Mat3::Identity()), 1e-14);
      const double a = kPi * k / l;
      const Vec3 in_plane(std::cos(a), std::sin(a), 0.7);
      EXPECT_LT((m * in_plane - in_plane).norm(), 1e-14);
    }
}

TEST(Group, ClosedUnderMultiplication) {
  for (int l = 2; l <= 8; ++l) {
    const auto mats = group_matrices(l);
    for (const auto& a : mats)
      for (const auto& b : mats) {
        const Mat3 p = a * b;
        const bool found = std::any_of(mats.begin(), mats.end(),
                                       [&](const Mat3& m) { return max_abs(m - p) < 1e-12; });
        EXPECT_TRUE(found) << "l=" << l;
      }
  }
}

TEST(Group, PermutesTheVertexSet) {
  const Vec3 p(0.3, -0.2, 0.9);
  for (int l = 2; l <= 8; ++l) {
    const auto mats = group_matrices(l);
    std::vector<Vec3> verts;
    for (const auto& m : mats) verts.push_back(m * p);
    for (const auto& g : mats)
      for (const auto& v : verts) {
        const Vec3 w = g * v;
        EXPECT_TRUE(std::any_of(verts.begin(), verts.end(),
                                [&](const Vec3& u) { return (u - w).norm() < 1e-12; }));
      }
  }
}

TEST(MinimalH, Examples) {
  EXPECT_EQ(minimal_h(12, 9), 4);
  for (int l = 2; l <= 20; ++l) EXPECT_EQ(minimal_h(l, 1), l);
  EXPECT_EQ(minimal_h(6, 4), 3);
  EXPECT_THROW(minimal_h(6, 0), DomainError);
  EXPECT_THROW(minimal_h(6, 7), DomainError);
}

TEST(MinimalH, MatchesBruteForceAndTwinSymmetry) {
  for (int l = 2; l <= 30; ++l)
    for (int s = 1; s < l; ++s) {
      int h = 1;
      while ((s * h) % l != 0) ++h;
      EXPECT_EQ(minimal_h(l, s), h);
      EXPECT_EQ(minimal_h(l, s), minimal_h(l, l - s));
      EXPECT_EQ(l % h, 0);
    }
}

TEST(Params, Validation) {
  EXPECT_THROW(SymmetryParams::make(5, 1), DomainError);
  EXPECT_THROW(SymmetryParams::make(2, 1), DomainError);
  EXPECT_THROW(SymmetryParams::make(4, 2), DomainError);
  EXPECT_THROW(SymmetryParams::make(8, 1, 0.0), DomainError);
  const auto p = SymmetryParams::make(24, 6, 2.0);
  EXPECT_EQ(p.l, 12);
  EXPECT_EQ(p.h, 2);
  EXPECT_DOUBLE_EQ(p.fundamental_length(), 0.5);
  EXPECT_EQ(SymmetryParams::make_relaxed(24, 9).h, 4);
}

TEST(Choreography, L12S9KnownClasses) {
  const std::vector<std::vector<int>> expect{{0, 9, 6, 3},     {1, 10, 7, 4},
                                             {2, 11, 8, 5},    {12, 15, 18, 21},
                                             {23, 14, 17, 20}, {22, 13, 16, 19}};
  EXPECT_EQ(choreography_classes(12, 9).classes, expect);
}

TEST(Choreography, L2S1) {
  const std::vector<std::vector<int>> expect{{0, 1}, {2, 3}};
  EXPECT_EQ(choreography_classes(2, 1).classes, expect);
}

TEST(Choreography, PartitionSizes) {
  for (int l = 2; l <= 12; ++l)
    for (int s = 1; 2 * s <= l; ++s) {
      const auto p = SymmetryParams::make(2 * l, s);
      const auto cp = choreography_classes(p);
      ASSERT_EQ(static_cast<int>(cp.classes.size()), 2 * l / p.h);
      std::set<int> seen;
      for (const auto& c : cp.classes) {
        EXPECT_EQ(static_cast<int>(c.size()), p.h);
        seen.insert(c.begin(), c.end());
      }
      EXPECT_EQ(static_cast<int>(seen.size()), 2 * l);
      EXPECT_EQ(*seen.begin(), 0);
      EXPECT_EQ(*seen.rbegin(), 2 * l - 1);
    }
}

TEST(TwistBound, ReferenceTable) {
  const std::vector<std::pair<int, double>> table{{4, 0.4697},  {6, 1.1400},  {8, 1.7376},
                                                  {10, 2.2931}, {14, 3.3262}, {26, 6.0995}};
  for (const auto& [n, f] : table) EXPECT_NEAR(twist_bound(n), f, 5e-5) << "n=" << n;
}

TEST(TwistBound, MonotoneOn4To200) {
  for (int n = 4; n < 200; n += 2) EXPECT_LT(twist_bound(n), twist_bound(n + 2));
}

TEST(AdmissibleS, Examples) {
  EXPECT_EQ(admissible_s_max(4), 1);
  EXPECT_EQ(admissible_s_max(8), 1);
  EXPECT_EQ(admissible_s_max(8, true), 2);
  EXPECT_EQ(admissible_s_max(10), 2);
  EXPECT_EQ(admissible_s_max(14), 3);
  EXPECT_EQ(admissible_s_max(26), 6);
  EXPECT_THROW(admissible_s_max(7), DomainError);
  EXPECT_THROW(admissible_s_max(2), DomainError);
  for (int n = 4; n <= 200; n += 2) EXPECT_LE(2 * admissible_s_max(n), n / 2);
}
