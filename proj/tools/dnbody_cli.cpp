// dnbody: estimate / solve / verify / sweep.
//
// Exit status: 0 success, 1 verdict or convergence failure, 2 usage or input error.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "dnbody/dynamics.hpp"
#include "dnbody/estimates.hpp"
#include "dnbody/io.hpp"
#include "dnbody/solver.hpp"
#include "dnbody/symmetry.hpp"

namespace fs = std::filesystem;
using namespace dnbody;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kOk = 0, kFail = 1, kUsage = 2;

class Run {
 public:
  Run(std::string command, fs::path out) : out_(std::move(out)), start_(Clock::now()) {
    m_.command = std::move(command);
    m_.tool_version = kVersion;
  }
  RunManifest& manifest() { return m_; }

  /// Writes `<out>.manifest.json` and returns `code`.
  int finish(int code, const std::string& failure = {}) {
    m_.exit_code = code;
    if (!failure.empty()) {
      m_.failure = failure;
      std::cerr << "error: " << failure << "\n";
    }
    m_.wall_time = std::chrono::duration<double>(Clock::now() - start_).count();
    fs::path path = out_;
    path += ".manifest.json";
    try {
      write_json(path, manifest_to_json(m_));
    } catch (const std::exception& e) {
      std::cerr << "error: manifest not written: " << e.what() << "\n";
      return code == kOk ? kFail : code;
    }
    return code;
  }

 private:
  using Clock = std::chrono::steady_clock;
  RunManifest m_;
  fs::path out_;
  Clock::time_point start_;
};

void print_estimate(const EstimateReport& r) {
  std::printf("n=%d l=%d s=%d h=%d T=%g N=%d test_loop=%s%s\n", r.params.n, r.params.l,
              r.params.s, r.params.h, r.params.T, r.N, to_string(r.kind).c_str(),
              r.remark8 ? " (remark8)" : "");
  std::printf("  B          %.10f\n", r.B);
  std::printf("  A_bound    %.10f   ratio %.6f\n", r.A_bound, r.ratio_bound);
  std::printf("  A_numeric  %.10f   ratio %.6f\n", r.A_numeric, r.ratio_numeric);
  std::printf("  margin     %.10f   verdict %s\n", r.margin(), r.verdict ? "true" : "false");
}

struct EstimateArgs {
  int n = 4, s = 1, N = 256;
  double T = 1.0;
  bool remark8 = false, force = false;
  std::string out = "estimate.json";
};

int cmd_estimate(const EstimateArgs& a) {
  Run run("estimate", a.out);
  auto& m = run.manifest();
  m.config = Json{{"n", a.n}, {"s", a.s}, {"T", a.T}, {"N", a.N},
                  {"remark8", a.remark8}, {"force", a.force}};
  try {
    const auto p = a.force ? SymmetryParams::make_relaxed(a.n, a.s, a.T)
                           : SymmetryParams::make(a.n, a.s, a.T);
    if (!a.force && p.s > admissible_s_max(p.n, a.remark8))
      std::fprintf(stderr, "warning: s = %d exceeds admissible_s_max(%d) = %d\n", p.s, p.n,
                   admissible_s_max(p.n, a.remark8));
    const auto rep = exclusion_report(p, a.N, a.remark8);
    write_json(a.out, estimate_to_json(rep));
    m.outputs.push_back(a.out);
    m.verdicts["verdict"] = rep.verdict;
    m.verdicts["margin"] = rep.margin();
    print_estimate(rep);
    return run.finish(rep.verdict ? kOk : kFail, rep.verdict ? "" : "A_numeric >= B");
  } catch (const DomainError& e) {
    return run.finish(kUsage, e.what());
  } catch (const std::exception& e) {
    return run.finish(kUsage, e.what());
  }
}

struct SolveArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> N;
  bool force = false;
  std::string out = "orbit.json";
};

int cmd_solve(const SolveArgs& a) {
  Run run("solve", a.out);
  auto& m = run.manifest();
  m.inputs.push_back(a.config);
  SolveJob job;
  try {
    if (!fs::exists(a.config)) return run.finish(kUsage, "config file not found: " + a.config);
    job = solve_job_from_json(read_json(a.config), a.force);
    if (a.seed) job.config.seed = *a.seed;
    if (a.N) job.config.N = *a.N, job.refine.clear();
    if (job.config.initial_guess == InitialGuess::file) {
      fs::path init = job.initial_file;
      if (init.is_relative()) init = fs::path(a.config).parent_path() / init;
      job.config.initial_loop = read_orbit(init).loop;
      m.inputs.push_back(init.string());
    }
    job.config.validate();
  } catch (const std::exception& e) {
    m.config = Json::object();
    return run.finish(kUsage, e.what());
  }
  m.config = solve_job_to_json(job);
  auto& cfg = job.config;

  try {
    const auto est = exclusion_report(cfg.params, 256, cfg.remark8);
    m.verdicts["estimate_verdict"] = est.verdict;
    if (!est.verdict && !a.force)
      return run.finish(kFail, "estimate verdict false; use --force to solve anyway");

    auto res = solve(cfg);
    std::printf("N=%-5d action %.12f grad %.3e iters %d %s\n", res.loop.N(), res.action.total,
                res.grad_norm, res.iterations, to_string(res.termination).c_str());
    Json ladder = Json::array();
    ladder.push_back(Json{{"N", res.loop.N()}, {"action", res.action.total},
                          {"termination", to_string(res.termination)}});
    for (int N : job.refine) {
      if (res.termination != Termination::converged) break;
      res = refine(res, N, cfg);
      std::printf("N=%-5d action %.12f grad %.3e iters %d %s\n", res.loop.N(), res.action.total,
                  res.grad_norm, res.iterations, to_string(res.termination).c_str());
      ladder.push_back(Json{{"N", res.loop.N()}, {"action", res.action.total},
                            {"termination", to_string(res.termination)}});
    }
    write_orbit(a.out, make_orbit_file(res.loop, res.action.total, res.min_pair_distance));
    m.outputs.push_back(a.out);
    const bool converged = res.termination == Termination::converged;
    m.verdicts = Json{{"estimate_verdict", est.verdict},
                      {"termination", to_string(res.termination)},
                      {"converged", converged},
                      {"below_B", res.below_B},
                      {"action", res.action.total},
                      {"B", res.B},
                      {"grad_norm", res.grad_norm},
                      {"min_pair_distance", res.min_pair_distance},
                      {"min_axis_distance", res.min_axis.value},
                      {"ladder", ladder}};
    std::printf("B %.12f below_B %s min_pair_distance %.6g\n", res.B,
                res.below_B ? "true" : "false", res.min_pair_distance);
    if (!converged) return run.finish(kFail, "solver terminated: " + to_string(res.termination));
    if (!res.below_B) return run.finish(kFail, "action not below B");
    return run.finish(kOk);
  } catch (const std::exception& e) {
    return run.finish(kFail, e.what());
  }
}

struct VerifyArgs {
  std::string orbit;
  std::string out = "verify.json";
  double closure_tol = 1e-4;
  double el_tol = 1e-3;
  bool raw = false;
};

int cmd_verify(const VerifyArgs& a) {
  Run run("verify", a.out);
  auto& m = run.manifest();
  m.inputs.push_back(a.orbit);
  m.config = Json{{"closure_tol", a.closure_tol}, {"el_tol", a.el_tol}, {"raw", a.raw}};
  std::optional<OrbitFile> orbit;
  try {
    orbit = read_orbit(a.orbit);
  } catch (const std::exception& e) {
    return run.finish(kUsage, e.what());
  }
  try {
    VerificationReport rep;
    const auto& loop = orbit->loop;
    if (!a.raw && loop.N() % 2 == 0 && loop.N() >= 128) {
      SolveConfig cfg;
      cfg.params = loop.params();
      const auto coarse = coarse_companion(loop, cfg);
      rep = verify_extrapolated(coarse.loop, loop);
    } else {
      rep = verify_loop(loop);
    }
    write_json(a.out, verification_to_json(rep));
    m.outputs.push_back(a.out);
    const bool pass = rep.ok && rep.closure_error < a.closure_tol && rep.el_residual < a.el_tol;
    m.verdicts = Json{{"pass", pass},
                      {"closure_error", detail::number_or_null(rep.closure_error)},
                      {"closure_error_raw", detail::number_or_null(rep.closure_error_raw)},
                      {"el_residual", rep.el_residual},
                      {"energy_drift", rep.energy_drift}};
    std::printf("el_residual %.3e (joins %.3e)\n", rep.el_residual, rep.el_residual_joins);
    std::printf("closure_error %.3e [%s], raw %.3e\n", rep.closure_error,
                rep.initial_data.c_str(), rep.closure_error_raw);
    std::printf("energy_drift %.3e symmetry_drift %.3e min_pair_distance %.6g steps %ld\n",
                rep.energy_drift, rep.symmetry_drift, rep.min_pair_distance, rep.steps);
    if (!rep.ok) return run.finish(kFail, "integration failed: " + rep.failure);
    if (!pass) return run.finish(kFail, "residuals above thresholds");
    return run.finish(kOk);
  } catch (const std::exception& e) {
    return run.finish(kFail, e.what());
  }
}

struct SweepArgs {
  int n_min = 4, n_max = 26, N = 256;
  double T = 1.0;
  std::string out = "sweep.json";
};

int cmd_sweep(const SweepArgs& a) {
  Run run("sweep", a.out);
  auto& m = run.manifest();
  m.config = Json{{"n_min", a.n_min}, {"n_max", a.n_max}, {"T", a.T}, {"N", a.N}};
  if (a.n_min < 4 || a.n_min % 2 || a.n_max % 2 || a.n_max < a.n_min)
    return run.finish(kUsage, "n range must be even with 4 <= n-min <= n-max");
  try {
    Json rows = Json::array();
    bool all = true;
    std::printf("%4s %10s %6s %3s %4s %16s %16s %16s %8s\n", "n", "f(n)", "s_max", "s", "h", "B",
                "A_bound", "A_numeric", "verdict");
    for (int n = a.n_min; n <= a.n_max; n += 2) {
      const int smax = admissible_s_max(n);
      for (int s = 1; s <= smax; ++s) {
        const auto p = SymmetryParams::make(n, s, a.T);
        const auto r = exclusion_report(p, a.N);
        all = all && r.verdict;
        std::printf("%4d %10.6f %6d %3d %4d %16.10f %16.10f %16.10f %8s\n", n, twist_bound(n),
                    smax, s, p.h, r.B, r.A_bound, r.A_numeric, r.verdict ? "true" : "false");
        rows.push_back(Json{{"n", n}, {"f", twist_bound(n)}, {"s_max", smax}, {"s", s},
                            {"h", p.h}, {"B", r.B}, {"A_bound", r.A_bound},
                            {"A_numeric", r.A_numeric}, {"verdict", r.verdict}});
      }
    }
    write_json(a.out, Json{{"T", a.T}, {"N", a.N}, {"rows", rows}, {"all_verdicts", all}});
    m.outputs.push_back(a.out);
    m.verdicts["all_verdicts"] = all;
    return run.finish(all ? kOk : kFail, all ? "" : "some verdict false");
  } catch (const std::exception& e) {
    return run.finish(kFail, e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dihedral-symmetric n-body orbits: estimates, solver, verification"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  EstimateArgs ea;
  auto* est = app.add_subcommand("estimate", "Total-collision exclusion report for (n, s, T)");
  est->add_option("--n", ea.n, "number of bodies (even, >= 4)")->required();
  est->add_option("--s", ea.s, "twist, 1 <= s <= l/2")->required();
  est->add_option("--T", ea.T, "period")->capture_default_str();
  est->add_option("--N", ea.N, "grid intervals on the fundamental domain")->capture_default_str();
  est->add_flag("--remark8", ea.remark8, "sharper test loop for n = 8, s = 2");
  est->add_flag("--force", ea.force, "accept any 1 <= s < l");
  est->add_option("--out", ea.out, "report path")->capture_default_str();

  SolveArgs sa;
  std::uint64_t seed = 0;
  int solveN = 0;
  auto* sol = app.add_subcommand("solve", "Minimize the reduced action from a config file");
  sol->add_option("config", sa.config, "solver config")->required();
  auto* seed_opt = sol->add_option("--seed", seed, "perturbation seed");
  auto* n_opt = sol->add_option("--N", solveN, "grid size (disables the refine ladder)");
  sol->add_flag("--force", sa.force, "solve even if s is inadmissible or the estimate fails");
  sol->add_option("--out", sa.out, "orbit path")->capture_default_str();

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "Euler-Lagrange residual and one-period integration");
  ver->add_option("orbit", va.orbit, "orbit file")->required();
  ver->add_option("--out", va.out, "report path")->capture_default_str();
  ver->add_option("--closure-tol", va.closure_tol, "pass threshold")->capture_default_str();
  ver->add_option("--el-tol", va.el_tol, "pass threshold (relative)")->capture_default_str();
  ver->add_flag("--raw", va.raw, "integrate from the loop itself, no extrapolation");

  SweepArgs wa;
  auto* swp = app.add_subcommand("sweep", "f(n) table and exclusion verdicts over a range of n");
  swp->add_option("--n-min", wa.n_min)->capture_default_str();
  swp->add_option("--n-max", wa.n_max)->capture_default_str();
  swp->add_option("--T", wa.T)->capture_default_str();
  swp->add_option("--N", wa.N)->capture_default_str();
  swp->add_option("--out", wa.out)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  if (*est) return cmd_estimate(ea);
  if (*sol) {
    if (*seed_opt) sa.seed = seed;
    if (*n_opt) sa.N = solveN;
    return cmd_solve(sa);
  }
  if (*ver) return cmd_verify(va);
  return cmd_sweep(wa);
}
