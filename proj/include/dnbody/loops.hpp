#pragma once

// The generating particle u_0 sampled on the fundamental domain [0, T/2h],
// its extension to a full period, and reconstruction of all n bodies.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dnbody/errors.hpp"
#include "dnbody/symmetry.hpp"

namespace dnbody {

/// Orthonormal in-plane basis (horizontal direction, e_3) of P_k.
inline std::pair<Vec3, Vec3> plane_basis(int l, int k) {
  const double ang = kPi * k / l;
  return {Vec3(std::cos(ang), std::sin(ang), 0.0), Vec3::UnitZ()};
}

/// Unit normal of P_k.
inline Vec3 plane_normal(int l, int k) {
  const double ang = kPi * k / l;
  return Vec3(-std::sin(ang), std::cos(ang), 0.0);
}

class GeneratingLoop {
 public:
  /// `nodes` holds u_0(t_i) for t_i = i * T/(2hN), i = 0..N.
  GeneratingLoop(SymmetryParams params, std::vector<Vec3> nodes)
      : params_(params), nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) throw DomainError("GeneratingLoop: need at least 2 nodes");
    const double tol = 1e-12 * std::max(1.0, scale());
    if (std::abs(plane_normal(params_.l, 0).dot(nodes_.front())) > tol)
      throw DomainError("GeneratingLoop: first node not in plane P_0");
    if (std::abs(plane_normal(params_.l, params_.s).dot(nodes_.back())) > tol)
      throw DomainError("GeneratingLoop: last node not in plane P_s");
  }

  const SymmetryParams& params() const { return params_; }
  int N() const { return static_cast<int>(nodes_.size()) - 1; }
  double dt() const { return params_.fundamental_length() / N(); }
  double time(int i) const { return i * dt(); }
  const std::vector<Vec3>& nodes() const { return nodes_; }
  const Vec3& node(int i) const { return nodes_[i]; }
  const Vec3& front() const { return nodes_.front(); }
  const Vec3& back() const { return nodes_.back(); }

  /// max_i |u_0(t_i)|
  double scale() const {
    double m = 0.0;
    for (const auto& x : nodes_) m = std::max(m, x.norm());
    return m;
  }

  /// Piecewise-linear value on [0, T/2h] (clamped outside).
  Vec3 at(double t) const {
    const double u = std::clamp(t / dt(), 0.0, static_cast<double>(N()));
    const int i = std::min(static_cast<int>(u), N() - 1);
    const double w = u - i;
    return (1.0 - w) * nodes_[i] + w * nodes_[i + 1];
  }

  /// Free coordinates: 2 in-plane coordinates for each endpoint, 3 for each
  /// interior node. Layout [a0, b0, x1, y1, z1, ..., aN, bN].
  Eigen::VectorXd free_coordinates() const {
    Eigen::VectorXd q(free_size(N()));
    const auto [e0, z0] = plane_basis(params_.l, 0);
    const auto [es, zs] = plane_basis(params_.l, params_.s);
    q[0] = e0.dot(nodes_.front());
    q[1] = z0.dot(nodes_.front());
    for (int i = 1; i < N(); ++i) q.segment<3>(2 + 3 * (i - 1)) = nodes_[i];
    q[q.size() - 2] = es.dot(nodes_.back());
    q[q.size() - 1] = zs.dot(nodes_.back());
    return q;
  }

  static Eigen::Index free_size(int N) { return 3 * static_cast<Eigen::Index>(N) + 1; }

  static GeneratingLoop from_free(const SymmetryParams& p, int N, const Eigen::VectorXd& q) {
    if (q.size() != free_size(N)) throw DomainError("from_free: wrong coordinate count");
    const auto [e0, z0] = plane_basis(p.l, 0);
    const auto [es, zs] = plane_basis(p.l, p.s);
    std::vector<Vec3> nodes(N + 1);
    nodes[0] = q[0] * e0 + q[1] * z0;
    nodes[0][1] = 0.0;
    for (int i = 1; i < N; ++i) nodes[i] = q.segment<3>(2 + 3 * (i - 1));
    nodes[N] = q[q.size() - 2] * es + q[q.size() - 1] * zs;
    return GeneratingLoop(p, std::move(nodes));
  }

 private:
  SymmetryParams params_;
  std::vector<Vec3> nodes_;
};

/// Linear-in-time resampling onto N_new intervals (N_new a multiple of N).
inline GeneratingLoop upsample(const GeneratingLoop& loop, int N_new) {
  if (N_new < loop.N() || N_new % loop.N() != 0)
    throw DomainError("upsample: N_new must be a multiple of N");
  const int factor = N_new / loop.N();
  std::vector<Vec3> nodes;
  nodes.reserve(N_new + 1);
  for (int i = 0; i < loop.N(); ++i)
    for (int k = 0; k < factor; ++k) {
      const double w = static_cast<double>(k) / factor;
      nodes.push_back((1.0 - w) * loop.node(i) + w * loop.node(i + 1));
    }
  nodes.push_back(loop.back());
  return GeneratingLoop(loop.params(), std::move(nodes));
}

/// Every other node (N must be even).
inline GeneratingLoop coarsen(const GeneratingLoop& loop) {
  if (loop.N() % 2 != 0) throw DomainError("coarsen: N must be even");
  std::vector<Vec3> nodes;
  for (int i = 0; i <= loop.N(); i += 2) nodes.push_back(loop.node(i));
  return GeneratingLoop(loop.params(), std::move(nodes));
}

/// (4 fine - coarse) / 3 on the coarse grid; fine has twice the intervals of coarse.
/// Cancels the leading O(dt^2) term of a second-order discretization.
inline GeneratingLoop richardson(const GeneratingLoop& coarse, const GeneratingLoop& fine) {
  if (!(coarse.params() == fine.params()) || fine.N() != 2 * coarse.N())
    throw DomainError("richardson: fine loop must have twice the intervals of coarse");
  std::vector<Vec3> nodes;
  for (int i = 0; i <= coarse.N(); ++i)
    nodes.push_back((4.0 * fine.node(2 * i) - coarse.node(i)) / 3.0);
  nodes[0][1] = 0.0;
  return GeneratingLoop(coarse.params(), std::move(nodes));
}

/// u_0(t) for arbitrary t, from the fundamental domain via
/// u_0(t) = hat R_s u_0(T/h - t) and u_0(t) = R_s^k u_0(t - kT/h).
inline Vec3 extended_position(const GeneratingLoop& loop, double t) {
  const auto& p = loop.params();
  const double period = p.T / p.h;
  double tau = std::fmod(t, p.T);
  if (tau < 0) tau += p.T;
  int k = static_cast<int>(std::floor(tau / period));
  k = std::clamp(k, 0, p.h - 1);
  tau -= k * period;
  Vec3 v = tau <= 0.5 * period ? loop.at(tau)
                               : Vec3(reflection(p.l, p.s).matrix * loop.at(period - tau));
  const int power = (k * p.s) % p.l;
  return rotation(p.l, power).matrix * v;
}

struct SampledPath {
  std::vector<double> t;
  std::vector<Vec3> x;
};

/// u_0 on the full period, sampled at the loop's own spacing (2hN + 1 points).
/// Samples are exact images of the stored nodes, not interpolated values.
inline SampledPath extend_generating(const GeneratingLoop& loop) {
  const auto& p = loop.params();
  const int N = loop.N();
  const Mat3 mirror = reflection(p.l, p.s).matrix;
  std::vector<Vec3> block;  // one T/h block: 2N + 1 samples
  block.reserve(2 * N + 1);
  for (int i = 0; i <= N; ++i) block.push_back(loop.node(i));
  for (int i = N - 1; i >= 0; --i) block.push_back(mirror * loop.node(i));

  SampledPath out;
  const int total = 2 * p.h * N;
  out.t.reserve(total + 1);
  out.x.reserve(total + 1);
  for (int k = 0; k < p.h; ++k) {
    const Mat3 rk = rotation(p.l, (k * p.s) % p.l).matrix;
    for (int i = 0; i < 2 * N; ++i) out.x.push_back(rk * block[i]);
  }
  out.x.push_back(out.x.front());
  for (int i = 0; i <= total; ++i) out.t.push_back(p.T * i / total);
  return out;
}

struct FullOrbit {
  SymmetryParams params;
  int M = 0;
  std::vector<double> t;
  std::vector<std::vector<Vec3>> trajectories;  // [body][sample]
  ChoreographyPartition classes;
  std::vector<int> class_of;                    // body -> class index
};

/// All n bodies over one period, M + 1 samples; M must be a multiple of 2hN.
inline FullOrbit reconstruct(const GeneratingLoop& loop, int M) {
  const auto& p = loop.params();
  const int base = 2 * p.h * loop.N();
  if (M < base || M % base != 0)
    throw DomainError("reconstruct: M must be a positive multiple of 2hN = " +
                      std::to_string(base));
  FullOrbit orbit;
  orbit.params = p;
  orbit.M = M;
  std::vector<Vec3> u0(M + 1);
  if (M == base) {
    u0 = extend_generating(loop).x;
  } else {
    for (int i = 0; i < M; ++i) u0[i] = extended_position(loop, p.T * i / M);
    u0[M] = u0[0];
  }
  for (int i = 0; i <= M; ++i) orbit.t.push_back(p.T * i / M);
  const auto mats = group_matrices(p.l);
  orbit.trajectories.resize(p.n);
  for (int j = 0; j < p.n; ++j) {
    auto& traj = orbit.trajectories[j];
    traj.reserve(M + 1);
    for (const auto& x : u0) traj.push_back(mats[j] * x);
  }
  orbit.classes = choreography_classes(p.l, p.s);
  orbit.class_of.assign(p.n, -1);
  for (std::size_t c = 0; c < orbit.classes.classes.size(); ++c)
    for (int body : orbit.classes.classes[c]) orbit.class_of[body] = static_cast<int>(c);
  return orbit;
}

enum class ConeStatus { in_cone, on_boundary, outside };

struct ConeReport {
  ConeStatus status;
  double start_height;  // u_0(0) . e_3, must be < 0
  double end_height;    // u_0(T/2h) . e_3, must be > 0
  /// min(-start_height, end_height); positive iff strictly inside.
  double margin() const { return std::min(-start_height, end_height); }
};

inline ConeReport cone_check(const GeneratingLoop& loop) {
  ConeReport r{ConeStatus::in_cone, loop.front().z(), loop.back().z()};
  if (r.start_height > 0.0 || r.end_height < 0.0)
    r.status = ConeStatus::outside;
  else if (r.start_height == 0.0 || r.end_height == 0.0)
    r.status = ConeStatus::on_boundary;
  return r;
}

/// Discrete kinetic quadrature sum |x_{i+1} - x_i|^2 / dt against the cone
/// floor (2h/T) sin^2(s pi/l) |u_0(0)|^2; lhs >= rhs for every in-cone loop.
struct CoercivityWitness {
  double lhs;
  double rhs;
  bool holds() const { return lhs >= rhs; }
};

inline CoercivityWitness coercivity_witness(const GeneratingLoop& loop) {
  const auto& p = loop.params();
  double kin = 0.0;
  for (int i = 0; i < loop.N(); ++i) kin += (loop.node(i + 1) - loop.node(i)).squaredNorm();
  const double sn = std::sin(kPi * p.s / p.l);
  return {kin / loop.dt(), 2.0 * p.h / p.T * sn * sn * loop.front().squaredNorm()};
}

struct AxisDistance {
  double value = std::numeric_limits<double>::infinity();
  double time = 0.0;
  int axis = -1;  // -1: the xi_3 axis; k >= 0: horizontal line L_k
};

/// Distance from x to Gamma = xi_3-axis U {L_k}.
inline AxisDistance distance_to_axes(const Vec3& x, int l) {
  AxisDistance best{std::hypot(x.x(), x.y()), 0.0, -1};
  for (int k = 0; k < l; ++k) {
    const double ang = kPi * k / l;
    const Vec3 d(std::cos(ang), std::sin(ang), 0.0);
    const double dist = (x - x.dot(d) * d).norm();
    if (dist < best.value) best = {dist, 0.0, k};
  }
  return best;
}

inline AxisDistance min_distance_to_axes(const GeneratingLoop& loop) {
  AxisDistance best;
  for (int i = 0; i <= loop.N(); ++i) {
    auto d = distance_to_axes(loop.node(i), loop.params().l);
    if (d.value < best.value) best = {d.value, loop.time(i), d.axis};
  }
  return best;
}

inline AxisDistance min_distance_to_axes(const FullOrbit& orbit) {
  AxisDistance best;
  const auto& u0 = orbit.trajectories[0];
  for (std::size_t i = 0; i < u0.size(); ++i) {
    auto d = distance_to_axes(u0[i], orbit.params.l);
    if (d.value < best.value) best = {d.value, orbit.t[i], d.axis};
  }
  return best;
}

struct PairDistance {
  double value = std::numeric_limits<double>::infinity();
  double time = 0.0;
  int i = -1, j = -1;
};

inline PairDistance min_pair_distance(const FullOrbit& orbit) {
  PairDistance best;
  const int n = orbit.params.n;
  for (std::size_t k = 0; k < orbit.t.size(); ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double d = (orbit.trajectories[i][k] - orbit.trajectories[j][k]).norm();
        if (d < best.value) best = {d, orbit.t[k], i, j};
      }
  return best;
}

}  // namespace dnbody
