#pragma once

// Limited-memory quasi-Newton minimization of the discrete reduced action over
// loops in the open cone, with a step guard keeping every iterate off Gamma.

#include <Eigen/Dense>

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dnbody/action.hpp"
#include "dnbody/errors.hpp"
#include "dnbody/estimates.hpp"
#include "dnbody/loops.hpp"

namespace dnbody {

struct StepPolicy {
  double initial_step = 1.0;
  double backtrack = 0.5;  // in (0, 1)
  double armijo = 1e-4;
  int max_halvings = 60;
};

enum class InitialGuess { test_loop, perturbed_test_loop, file };

inline std::string to_string(InitialGuess g) {
  switch (g) {
    case InitialGuess::test_loop: return "test_loop";
    case InitialGuess::perturbed_test_loop: return "perturbed_test_loop";
    case InitialGuess::file: return "file";
  }
  return "?";
}

struct SolveConfig {
  SymmetryParams params;
  int N = 128;
  int max_iters = 20000;
  double grad_tol = 1e-8;
  StepPolicy step;
  std::uint64_t seed = 1;
  InitialGuess initial_guess = InitialGuess::perturbed_test_loop;
  double perturb_amplitude = 1e-2;  // relative to the initial loop scale
  int memory = 10;
  bool remark8 = false;             // n = 8, s = 2 test loop variant
  std::optional<GeneratingLoop> initial_loop;  // required when initial_guess == file
  /// Called with (iteration, action, nodes) after every accepted step.
  std::function<void(int, double, const std::vector<Vec3>&)> on_iterate;

  void validate() const {
    if (!(grad_tol > 0.0)) throw DomainError("SolveConfig: grad_tol must be positive");
    if (N < 64) throw DomainError("SolveConfig: N must be >= 64");
    if (!(step.backtrack > 0.0 && step.backtrack < 1.0))
      throw DomainError("SolveConfig: backtracking factor must be in (0, 1)");
    if (!(step.armijo > 0.0 && step.armijo < 1.0))
      throw DomainError("SolveConfig: Armijo constant must be in (0, 1)");
    if (!(step.initial_step > 0.0)) throw DomainError("SolveConfig: initial step must be positive");
    if (memory < 1) throw DomainError("SolveConfig: memory must be >= 1");
    if (max_iters < 0) throw DomainError("SolveConfig: max_iters must be >= 0");
    if (initial_guess == InitialGuess::file && !initial_loop)
      throw DomainError("SolveConfig: initial_guess = file needs a loop");
  }
};

enum class Termination {
  converged,
  iter_cap,
  boundary_stall,  // the step guard rejected every trial step
  stalled,         // no acceptable step for numerical reasons away from the boundary
};

inline std::string to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::iter_cap: return "iter_cap";
    case Termination::boundary_stall: return "boundary_stall";
    case Termination::stalled: return "stalled";
  }
  return "?";
}

struct SolveResult {
  GeneratingLoop loop;
  ActionValue action;
  double grad_norm = 0.0;
  int iterations = 0;
  double min_pair_distance = 0.0;
  AxisDistance min_axis;
  double B = 0.0;
  bool below_B = false;
  Termination termination = Termination::iter_cap;
  std::vector<double> history;  // action after each accepted iterate, starting value first
};

/// Smooth random perturbation that keeps the endpoints in their planes.
inline GeneratingLoop perturb(const GeneratingLoop& loop, std::uint64_t seed, double amplitude) {
  if (amplitude < 0.0) throw DomainError("perturb: amplitude must be >= 0");
  if (amplitude == 0.0) return loop;
  constexpr int kModes = 4;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto rand_vec = [&] { return Vec3(unit(rng), unit(rng), unit(rng)); };

  std::vector<Vec3> modes;
  for (int k = 0; k < kModes; ++k) modes.push_back(amplitude / kModes * rand_vec());
  const auto& p = loop.params();
  const auto [e0, z0] = plane_basis(p.l, 0);
  const auto [es, zs] = plane_basis(p.l, p.s);
  const Vec3 d0 = 0.5 * amplitude * (unit(rng) * e0 + unit(rng) * z0);
  const Vec3 dN = 0.5 * amplitude * (unit(rng) * es + unit(rng) * zs);

  std::vector<Vec3> nodes = loop.nodes();
  const int N = loop.N();
  for (int i = 0; i <= N; ++i) {
    const double u = static_cast<double>(i) / N;
    Vec3 d = (1.0 - u) * d0 + u * dN;
    if (i > 0 && i < N)
      for (int k = 0; k < kModes; ++k) d += std::sin((k + 1) * kPi * u) * modes[k];
    nodes[i] += d;
  }
  nodes[0][1] = 0.0;
  return GeneratingLoop(p, std::move(nodes));
}

namespace detail {

inline SolveResult finish(const ActionFunctional& F, const Eigen::VectorXd& q,
                          const Eigen::VectorXd& g, int iters, Termination term,
                          std::vector<double> history) {
  const auto& p = F.params();
  auto loop = GeneratingLoop(p, F.nodes_from_free(q));
  SolveResult r{loop, F.value(loop.nodes())};
  r.grad_norm = g.norm();
  r.iterations = iters;
  const auto orbit = reconstruct(loop, 2 * p.h * loop.N());
  r.min_pair_distance = min_pair_distance(orbit).value;
  r.min_axis = min_distance_to_axes(loop);
  r.B = total_collision_lower_bound(p);
  r.below_B = r.action.total < r.B;
  r.termination = term;
  r.history = std::move(history);
  return r;
}

}  // namespace detail

/// Minimize from a given in-cone loop.
inline SolveResult minimize_from(const GeneratingLoop& start, const SolveConfig& cfg) {
  const auto& p = start.params();
  const auto cone = cone_check(start);
  if (cone.status != ConeStatus::in_cone)
    throw DomainError("solve: initial guess is not inside the cone");

  const ActionFunctional F(p, start.N());
  const double a0 = start.scale();
  const double guard_axis = 1e-8;         // relative distance to Gamma
  const double guard_cone = 1e-8 * a0;    // endpoint heights

  auto admissible = [&](const std::vector<Vec3>& nodes) {
    if (-nodes.front().z() <= guard_cone || nodes.back().z() <= guard_cone) return false;
    double scale = 0.0;
    for (const auto& x : nodes) scale = std::max(scale, x.norm());
    for (const auto& x : nodes)
      if (distance_to_axes(x, p.l).value < guard_axis * scale) return false;
    return true;
  };

  Eigen::VectorXd q = start.free_coordinates();
  auto nodes = F.nodes_from_free(q);
  double f = F.value(nodes).total;
  Eigen::VectorXd g = F.free_gradient(nodes);
  std::vector<double> history{f};

  std::deque<Eigen::VectorXd> S, Y;
  std::deque<double> rho;
  constexpr double kEps = 1e-12;  // relative slack for the approximate-Wolfe acceptance

  int it = 0;
  for (;; ++it) {
    if (g.norm() <= cfg.grad_tol)
      return detail::finish(F, q, g, it, Termination::converged, std::move(history));
    if (it >= cfg.max_iters)
      return detail::finish(F, q, g, it, Termination::iter_cap, std::move(history));

    bool accepted = false, guard_hit = false;
    Eigen::VectorXd q_new, g_new;
    double f_new = f;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      // two-loop recursion
      Eigen::VectorXd d = -g;
      if (!S.empty()) {
        std::vector<double> alpha(S.size());
        for (int k = static_cast<int>(S.size()) - 1; k >= 0; --k) {
          alpha[k] = rho[k] * S[k].dot(d);
          d -= alpha[k] * Y[k];
        }
        d *= S.back().dot(Y.back()) / Y.back().squaredNorm();
        for (std::size_t k = 0; k < S.size(); ++k) {
          const double beta = rho[k] * Y[k].dot(d);
          d += (alpha[k] - beta) * S[k];
        }
      }
      double slope = g.dot(d);
      if (!(slope < 0.0)) {
        S.clear(), Y.clear(), rho.clear();
        d = -g;
        slope = g.dot(d);
      }
      double step = cfg.step.initial_step;
      if (S.empty()) step = std::min(step, 1e-2 * std::max(a0, 1e-300) / d.norm());

      for (int k = 0; k <= cfg.step.max_halvings; ++k, step *= cfg.step.backtrack) {
        Eigen::VectorXd trial = q + step * d;
        auto trial_nodes = F.nodes_from_free(trial);
        if (!admissible(trial_nodes)) {
          guard_hit = true;
          continue;
        }
        const double ft = F.value(trial_nodes).total;
        const bool armijo = ft <= f + cfg.step.armijo * step * slope;
        bool approx_wolfe = false;
        Eigen::VectorXd gt;
        if (!armijo && ft <= f + kEps * std::abs(f)) {
          gt = F.free_gradient(trial_nodes);
          const double slope_t = gt.dot(d);
          approx_wolfe = slope_t >= 0.9 * slope && slope_t <= (2 * cfg.step.armijo - 1) * slope;
        }
        if (armijo || approx_wolfe) {
          q_new = std::move(trial);
          f_new = ft;
          g_new = gt.size() ? std::move(gt) : F.free_gradient(trial_nodes);
          accepted = true;
          break;
        }
      }
      if (!accepted) S.clear(), Y.clear(), rho.clear();  // retry once along -g
    }
    if (!accepted)
      return detail::finish(F, q, g, it,
                            guard_hit ? Termination::boundary_stall : Termination::stalled,
                            std::move(history));

    Eigen::VectorXd s = q_new - q, y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      S.push_back(std::move(s));
      Y.push_back(std::move(y));
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > cfg.memory) S.pop_front(), Y.pop_front(), rho.pop_front();
    }
    q = std::move(q_new);
    g = std::move(g_new);
    f = f_new;
    history.push_back(f);
    if (cfg.on_iterate) cfg.on_iterate(it + 1, f, F.nodes_from_free(q));
  }
}

/// Initial loop for a configuration (test loop, optionally perturbed, or the given loop).
inline GeneratingLoop initial_loop(const SolveConfig& cfg) {
  if (cfg.initial_guess == InitialGuess::file) {
    const auto& loop = *cfg.initial_loop;
    if (!(loop.params() == cfg.params))
      throw DomainError("solve: initial loop parameters do not match the configuration");
    if (loop.N() == cfg.N) return loop;
    return upsample(loop, cfg.N);
  }
  const auto tl = select_test_loop(cfg.params, cfg.N, cfg.remark8);
  if (cfg.initial_guess == InitialGuess::test_loop) return tl.loop;
  return perturb(tl.loop, cfg.seed, cfg.perturb_amplitude * tl.loop.scale());
}

inline SolveResult solve(const SolveConfig& cfg) {
  cfg.validate();
  return minimize_from(initial_loop(cfg), cfg);
}

/// Upsample to N_new (a multiple of the current N) and minimize again.
inline SolveResult refine(const SolveResult& result, int N_new, SolveConfig cfg) {
  if (N_new <= result.loop.N() || N_new % result.loop.N() != 0)
    throw DomainError("refine: N_new must be a larger multiple of N");
  cfg.N = N_new;
  cfg.initial_guess = InitialGuess::file;
  cfg.initial_loop = upsample(result.loop, N_new);
  cfg.validate();
  return minimize_from(*cfg.initial_loop, cfg);
}

/// Re-minimized loop on every other node of `fine`; the coarse half of a
/// Richardson pair.
inline SolveResult coarse_companion(const GeneratingLoop& fine, SolveConfig cfg) {
  cfg.N = fine.N() / 2;
  return minimize_from(coarsen(fine), cfg);
}

}  // namespace dnbody
