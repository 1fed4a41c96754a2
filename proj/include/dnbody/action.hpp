#pragma once

// Discrete reduced action of the generating particle. With Delta = T/(2hN),
//
//   A = 2h (n/2) [ sum_i |x_{i+1} - x_i|^2 / Delta
//                + Delta sum_i w_i sum_{j=1}^{n-1} |(R_j - I) x_i|^{-1} ]
//
// where w_i are trapezoid weights. The kinetic part is the exact kinetic
// integral of the piecewise-linear interpolant of the nodes.

#include <Eigen/Dense>

#include <array>
#include <tuple>
#include <string>
#include <vector>

#include "dnbody/errors.hpp"
#include "dnbody/loops.hpp"
#include "dnbody/symmetry.hpp"

namespace dnbody {

inline constexpr double kSingularDistance = 1e-10;  // relative to loop scale

struct ActionValue {
  double total = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
  int N = 0;
  std::string rule = "linear-kinetic+trapezoid";
};

class ActionFunctional {
 public:
  explicit ActionFunctional(const SymmetryParams& p, int N) : params_(p), N_(N) {
    if (N < 1) throw DomainError("ActionFunctional: N must be >= 1");
    const auto mats = group_matrices(p.l);
    for (int j = 1; j < p.n; ++j) {
      const Mat3 d = mats[j] - Mat3::Identity();
      diffs_.push_back(d);
      grams_.push_back(d.transpose() * d);
    }
    std::tie(e0_, z0_) = plane_basis(p.l, 0);
    std::tie(es_, zs_) = plane_basis(p.l, p.s);
  }

  const SymmetryParams& params() const { return params_; }
  int N() const { return N_; }
  double dt() const { return params_.fundamental_length() / N_; }

  /// sum_{j=1}^{n-1} |(R_j - I) x|^{-1}
  double pair_sum(const Vec3& x) const {
    double v = 0.0;
    for (const auto& d : diffs_) v += 1.0 / (d * x).norm();
    return v;
  }

  Vec3 pair_sum_gradient(const Vec3& x) const {
    Vec3 g = Vec3::Zero();
    for (const auto& gm : grams_) {
      const Vec3 gx = gm * x;
      const double r2 = x.dot(gx);
      g -= gx / (r2 * std::sqrt(r2));
    }
    return g;
  }

  /// Index of the first node within kSingularDistance * scale of Gamma, or -1.
  int singular_node(const std::vector<Vec3>& nodes) const {
    double scale = 0.0;
    for (const auto& x : nodes) scale = std::max(scale, x.norm());
    const double tol = kSingularDistance * std::max(scale, 1e-300);
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (distance_to_axes(nodes[i], params_.l).value < tol) return static_cast<int>(i);
    return -1;
  }

  ActionValue value(const std::vector<Vec3>& nodes) const {
    check(nodes);
    const double delta = dt();
    const double c = params_.h * params_.n;  // 2h * (n/2)
    double kin = 0.0, pot = 0.0;
    for (int i = 0; i < N_; ++i) kin += (nodes[i + 1] - nodes[i]).squaredNorm();
    for (int i = 0; i <= N_; ++i) {
      const double w = (i == 0 || i == N_) ? 0.5 : 1.0;
      pot += w * pair_sum(nodes[i]);
    }
    ActionValue out;
    out.kinetic = c * kin / delta;
    out.potential = c * delta * pot;
    out.total = out.kinetic + out.potential;
    out.N = N_;
    return out;
  }

  /// Gradient with respect to every node position (unconstrained, 3 per node).
  std::vector<Vec3> node_gradient(const std::vector<Vec3>& nodes) const {
    check(nodes);
    const double delta = dt();
    const double c = params_.h * params_.n;
    std::vector<Vec3> g(N_ + 1, Vec3::Zero());
    for (int i = 0; i < N_; ++i) {
      const Vec3 seg = 2.0 * c / delta * (nodes[i + 1] - nodes[i]);
      g[i] -= seg;
      g[i + 1] += seg;
    }
    for (int i = 0; i <= N_; ++i) {
      const double w = (i == 0 || i == N_) ? 0.5 : 1.0;
      g[i] += c * delta * w * pair_sum_gradient(nodes[i]);
    }
    return g;
  }

  /// Gradient with respect to GeneratingLoop::free_coordinates().
  Eigen::VectorXd free_gradient(const std::vector<Vec3>& nodes) const {
    const auto g = node_gradient(nodes);
    Eigen::VectorXd out(GeneratingLoop::free_size(N_));
    out[0] = e0_.dot(g[0]);
    out[1] = z0_.dot(g[0]);
    for (int i = 1; i < N_; ++i) out.segment<3>(2 + 3 * (i - 1)) = g[i];
    out[out.size() - 2] = es_.dot(g[N_]);
    out[out.size() - 1] = zs_.dot(g[N_]);
    return out;
  }

  std::vector<Vec3> nodes_from_free(const Eigen::VectorXd& q) const {
    std::vector<Vec3> nodes(N_ + 1);
    nodes[0] = q[0] * e0_ + q[1] * z0_;
    nodes[0][1] = 0.0;
    for (int i = 1; i < N_; ++i) nodes[i] = q.segment<3>(2 + 3 * (i - 1));
    nodes[N_] = q[q.size() - 2] * es_ + q[q.size() - 1] * zs_;
    return nodes;
  }

 private:
  void check(const std::vector<Vec3>& nodes) const {
    if (static_cast<int>(nodes.size()) != N_ + 1)
      throw DomainError("ActionFunctional: node count mismatch");
    if (const int i = singular_node(nodes); i >= 0)
      throw SingularityError("action: node on a collision axis", i);
  }

  SymmetryParams params_;
  int N_;
  std::vector<Mat3> diffs_;
  std::vector<Mat3> grams_;
  Vec3 e0_, z0_, es_, zs_;
};

inline ActionValue reduced_action(const GeneratingLoop& loop) {
  return ActionFunctional(loop.params(), loop.N()).value(loop.nodes());
}

inline Eigen::VectorXd action_gradient(const GeneratingLoop& loop) {
  return ActionFunctional(loop.params(), loop.N()).free_gradient(loop.nodes());
}

}  // namespace dnbody
