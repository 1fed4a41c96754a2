#pragma once

// Independent check that a generating loop is a periodic solution of Newton's
// equations: finite-difference Euler-Lagrange residual of the reconstructed
// trajectory, and adaptive integration of the full 3n-dimensional system.

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dnbody/errors.hpp"
#include "dnbody/loops.hpp"
#include "dnbody/symmetry.hpp"

namespace dnbody {

/// Acceleration of every body, unit masses: a_i = sum_{j != i} (x_j - x_i) / |x_j - x_i|^3.
inline std::vector<Vec3> newton_accelerations(const std::vector<Vec3>& x) {
  const std::size_t n = x.size();
  std::vector<Vec3> a(n, Vec3::Zero());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec3 d = x[j] - x[i];
      const double r2 = d.squaredNorm();
      const Vec3 f = d / (r2 * std::sqrt(r2));
      a[i] += f;
      a[j] -= f;
    }
  return a;
}

/// Force on body 0 when body j sits at R_j x.
inline Vec3 generating_force(const Vec3& x, const std::vector<Mat3>& mats) {
  Vec3 f = Vec3::Zero();
  for (std::size_t j = 1; j < mats.size(); ++j) {
    const Vec3 d = mats[j] * x - x;
    const double r = d.norm();
    f += d / (r * r * r);
  }
  return f;
}

struct ResidualProfile {
  double max = 0.0;          // max |x'' - F| over all nodes, divided by force_scale
  double max_interior = 0.0; // excluding the fundamental-domain joins t = k T/2h
  double max_joins = 0.0;    // at the joins only
  double force_scale = 0.0;  // max |F|
  std::vector<double> profile;  // per node of the fundamental domain, relative
};

/// Euler-Lagrange residual of u_0 on its loop's own grid. The second derivative
/// uses the 5-point fourth-order stencil on the periodic extension, so the
/// residual measures the discretization error of the loop itself.
inline ResidualProfile el_residual(const GeneratingLoop& loop) {
  const auto& p = loop.params();
  if (p.l < 2) throw DomainError("el_residual: l must be >= 2");
  const auto path = extend_generating(loop);
  const int total = static_cast<int>(path.x.size()) - 1;  // periodic: x[total] == x[0]
  const double dt = loop.dt();
  const auto mats = group_matrices(p.l);
  auto X = [&](int i) -> const Vec3& { return path.x[((i % total) + total) % total]; };

  std::vector<double> raw(total);
  double force_scale = 0.0;
  for (int i = 0; i < total; ++i) {
    if (distance_to_axes(X(i), p.l).value < 1e-10 * loop.scale())
      throw SingularityError("el_residual: node on a collision axis", i);
    const Vec3 acc = (-X(i + 2) + 16.0 * X(i + 1) - 30.0 * X(i) + 16.0 * X(i - 1) - X(i - 2)) /
                     (12.0 * dt * dt);
    const Vec3 f = generating_force(X(i), mats);
    force_scale = std::max(force_scale, f.norm());
    raw[i] = (acc - f).norm();
  }
  ResidualProfile out;
  out.force_scale = force_scale;
  const int N = loop.N();
  for (int i = 0; i < total; ++i) {
    const double rel = raw[i] / force_scale;
    out.max = std::max(out.max, rel);
    if (i % N == 0)
      out.max_joins = std::max(out.max_joins, rel);
    else
      out.max_interior = std::max(out.max_interior, rel);
  }
  out.profile.assign(raw.begin(), raw.begin() + N + 1);
  for (auto& v : out.profile) v /= force_scale;
  return out;
}

struct BodyState {
  std::vector<Vec3> x;
  std::vector<Vec3> v;
};

/// Positions and velocities of all bodies at t = 0. Velocity of u_0 from the
/// centered fourth-order difference on the periodic extension.
inline BodyState initial_state(const GeneratingLoop& loop) {
  const auto& p = loop.params();
  const auto path = extend_generating(loop);
  const int total = static_cast<int>(path.x.size()) - 1;
  auto X = [&](int i) -> const Vec3& { return path.x[((i % total) + total) % total]; };
  const double dt = loop.dt();
  const Vec3 v0 = (-X(2) + 8.0 * X(1) - 8.0 * X(-1) + X(-2)) / (12.0 * dt);
  BodyState s;
  for (const auto& m : group_matrices(p.l)) {
    s.x.push_back(m * X(0));
    s.v.push_back(m * v0);
  }
  return s;
}

inline double kinetic_energy(const BodyState& s) {
  double k = 0.0;
  for (const auto& v : s.v) k += 0.5 * v.squaredNorm();
  return k;
}

inline double potential_energy(const std::vector<Vec3>& x) {
  double u = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) u += 1.0 / (x[i] - x[j]).norm();
  return u;
}

/// Physical energy K - U (U is the positive pair sum).
inline double total_energy(const BodyState& s) { return kinetic_energy(s) - potential_energy(s.x); }

inline double angular_momentum_z(const BodyState& s) {
  double lz = 0.0;
  for (std::size_t i = 0; i < s.x.size(); ++i) lz += s.x[i].cross(s.v[i]).z();
  return lz;
}

struct IntegrationOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double min_step_fraction = 1e-14;  // failure when dt < this * T
  int samples = 0;                   // if > 0, record this many evenly spaced states
};

struct VerificationReport {
  double el_residual = 0.0;        // relative, max over nodes (see ResidualProfile)
  double el_residual_joins = 0.0;
  double closure_error = 0.0;      // max(|dx|/|x|, |dv|/|v|) between t = T and t = 0
  double closure_error_raw = 0.0;  // same, from the loop's own initial state
  std::string initial_data = "loop";  // "loop" or "richardson"
  double energy_drift = 0.0;       // max |E(t) - E(0)| / |E(0)|
  double angular_momentum_drift = 0.0;  // max |Lz(t) - Lz(0)| / (|x||v| scale)
  double min_pair_distance = 0.0;
  double symmetry_drift = 0.0;     // max_j |x_j - R_j x_0| / position scale
  long steps = 0;
  bool ok = true;
  std::string failure;
};

struct IntegrationResult {
  BodyState final_state;
  std::vector<double> sample_times;
  std::vector<BodyState> samples;
  VerificationReport report;
};

namespace detail {
using OdeState = std::vector<double>;

inline OdeState pack(const BodyState& s) {
  const std::size_t n = s.x.size();
  OdeState y(6 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) {
      y[3 * i + c] = s.x[i][c];
      y[3 * n + 3 * i + c] = s.v[i][c];
    }
  return y;
}

inline BodyState unpack(const OdeState& y) {
  const std::size_t n = y.size() / 6;
  BodyState s;
  s.x.resize(n);
  s.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.x[i] = Vec3(y[3 * i], y[3 * i + 1], y[3 * i + 2]);
    s.v[i] = Vec3(y[3 * n + 3 * i], y[3 * n + 3 * i + 1], y[3 * n + 3 * i + 2]);
  }
  return s;
}

inline double max_norm(const std::vector<Vec3>& v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, x.norm());
  return m;
}
}  // namespace detail

/// Integrates all n bodies over [0, T] with an adaptive Runge-Kutta-Fehlberg 7(8)
/// pair. `mats`, when non-empty, are the group matrices used for symmetry_drift.
inline IntegrationResult integrate(const BodyState& start, double T,
                                   const IntegrationOptions& opt = {},
                                   const std::vector<Mat3>& mats = {}) {
  namespace ode = boost::numeric::odeint;
  using detail::OdeState;
  const std::size_t n = start.x.size();
  if (n < 2 || start.v.size() != n) throw DomainError("integrate: inconsistent state");
  if (!(T > 0.0)) throw DomainError("integrate: T must be positive");

  auto rhs = [n](const OdeState& y, OdeState& dy, double) {
    std::vector<Vec3> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = Vec3(y[3 * i], y[3 * i + 1], y[3 * i + 2]);
    const auto a = newton_accelerations(x);
    for (std::size_t i = 0; i < 3 * n; ++i) dy[i] = y[3 * n + i];
    for (std::size_t i = 0; i < n; ++i)
      for (int c = 0; c < 3; ++c) dy[3 * n + 3 * i + c] = a[i][c];
  };

  IntegrationResult out;
  auto& rep = out.report;
  const double pos_scale = detail::max_norm(start.x);
  const double vel_scale = detail::max_norm(start.v);
  const double e0 = total_energy(start);
  const double lz0 = angular_momentum_z(start);

  auto observe = [&](const BodyState& s) {
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) dmin = std::min(dmin, (s.x[i] - s.x[j]).norm());
    rep.min_pair_distance = std::min(rep.min_pair_distance, dmin);
    rep.energy_drift = std::max(rep.energy_drift, std::abs(total_energy(s) - e0) / std::abs(e0));
    rep.angular_momentum_drift =
        std::max(rep.angular_momentum_drift,
                 std::abs(angular_momentum_z(s) - lz0) / (pos_scale * vel_scale * n));
    if (mats.size() == n)
      for (std::size_t j = 0; j < n; ++j)
        rep.symmetry_drift =
            std::max(rep.symmetry_drift, (s.x[j] - mats[j] * s.x[0]).norm() / pos_scale);
  };
  rep.min_pair_distance = std::numeric_limits<double>::infinity();
  observe(start);

  auto stepper = ode::make_controlled(opt.abs_tol, opt.rel_tol,
                                      ode::runge_kutta_fehlberg78<OdeState>());
  OdeState y = detail::pack(start);
  double t = 0.0;
  double dt = T * 1e-4;
  int next_sample = 0;
  auto record = [&](double time, const OdeState& state) {
    out.sample_times.push_back(time);
    out.samples.push_back(detail::unpack(state));
  };
  if (opt.samples > 0) record(0.0, y), next_sample = 1;

  while (t < T) {
    double target = T;
    if (opt.samples > 0 && next_sample <= opt.samples)
      target = T * next_sample / opt.samples;
    if (t + dt > target) dt = target - t;
    if (dt < opt.min_step_fraction * T) {
      rep.ok = false;
      rep.failure = "step size underflow at t = " + std::to_string(t);
      break;
    }
    const auto res = stepper.try_step(rhs, y, t, dt);
    if (res == ode::fail) continue;
    ++rep.steps;
    observe(detail::unpack(y));
    if (opt.samples > 0 && std::abs(t - target) <= 1e-14 * T && next_sample <= opt.samples) {
      record(target, y);
      ++next_sample;
    }
    if (T - t <= 1e-15 * T) t = T;
  }
  out.final_state = detail::unpack(y);
  if (rep.ok) {
    double dx = 0.0, dv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dx = std::max(dx, (out.final_state.x[i] - start.x[i]).norm());
      dv = std::max(dv, (out.final_state.v[i] - start.v[i]).norm());
    }
    rep.closure_error = std::max(dx / pos_scale, dv / vel_scale);
  } else {
    rep.closure_error = std::numeric_limits<double>::infinity();
  }
  return out;
}

/// EL residual plus one-period integration from the loop's initial state.
inline VerificationReport verify_loop(const GeneratingLoop& loop, const IntegrationOptions& opt = {}) {
  const auto res = el_residual(loop);
  const auto mats = group_matrices(loop.params().l);
  auto run = integrate(initial_state(loop), loop.params().T, opt, mats);
  run.report.el_residual = res.max;
  run.report.el_residual_joins = res.max_joins;
  run.report.closure_error_raw = run.report.closure_error;
  return run.report;
}

/// As verify_loop(fine), but the integration starts from the Richardson
/// extrapolation of (coarse, fine); closure_error_raw keeps the plain result.
inline VerificationReport verify_extrapolated(const GeneratingLoop& coarse,
                                              const GeneratingLoop& fine,
                                              const IntegrationOptions& opt = {}) {
  const auto raw = verify_loop(fine, opt);
  const auto mats = group_matrices(fine.params().l);
  auto run = integrate(initial_state(richardson(coarse, fine)), fine.params().T, opt, mats);
  auto rep = run.report;
  rep.el_residual = raw.el_residual;
  rep.el_residual_joins = raw.el_residual_joins;
  rep.closure_error_raw = raw.closure_error;
  rep.initial_data = "richardson";
  rep.ok = rep.ok && raw.ok;
  if (!raw.ok) rep.failure = raw.failure;
  return rep;
}

}  // namespace dnbody
