#pragma once

// Structured text I/O: orbit exchange files, estimate and verification
// reports, solver configs and run manifests. JSON data model; doubles are
// written with 17 significant digits; files are replaced atomically.

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unistd.h>
#include <vector>

#include "dnbody/dynamics.hpp"
#include "dnbody/errors.hpp"
#include "dnbody/estimates.hpp"
#include "dnbody/loops.hpp"
#include "dnbody/solver.hpp"
#include "dnbody/symmetry.hpp"

namespace dnbody {

using Json = nlohmann::ordered_json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  // keep a marker so the value reads back as a double
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

namespace detail {
inline bool is_flat(const Json& j) {
  for (const auto& e : j)
    if (e.is_structured()) return false;
  return true;
}

inline void dump(const Json& j, std::ostringstream& os, int indent) {
  const std::string pad(indent, ' '), inner(indent + 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << inner << Json(it.key()).dump() << ": ";
        dump(it.value(), os, indent + 2);
      }
      os << "\n" << pad << "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      if (is_flat(j)) {
        os << "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) os << ", ";
          dump(j[i], os, indent + 2);
        }
        os << "]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << inner;
        dump(j[i], os, indent + 2);
      }
      os << "\n" << pad << "]";
      return;
    }
    case Json::value_t::number_float: os << format_double(j.get<double>()); return;
    default: os << j.dump(); return;
  }
}
}  // namespace detail

/// Pretty-printed document with 17-significant-digit doubles and a trailing newline.
inline std::string to_text(const Json& j) {
  std::ostringstream os;
  detail::dump(j, os, 0);
  os << "\n";
  return os.str();
}

/// Writes to a sibling temporary file, then renames over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& text) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  write_atomic(path, to_text(j));
}

inline Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw IoError("malformed file " + path.string() + ": " + e.what());
  }
}

namespace detail {
inline double number_or_inf(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}
inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

template <class T>
T require(const Json& j, const char* key) {
  if (!j.contains(key)) throw IoError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw IoError(std::string("bad field '") + key + "': " + e.what());
  }
}
}  // namespace detail

// ---- params -----------------------------------------------------------------

inline Json params_to_json(const SymmetryParams& p) {
  return Json{{"n", p.n}, {"l", p.l}, {"s", p.s}, {"h", p.h}, {"T", p.T}};
}

/// Accepts any 1 <= s < l; l and h, when present, must agree with n and s.
inline SymmetryParams params_from_json(const Json& j) {
  try {
    const auto p = SymmetryParams::make_relaxed(detail::require<int>(j, "n"),
                                                detail::require<int>(j, "s"),
                                                j.value("T", 1.0));
    if (j.contains("l") && j.at("l").get<int>() != p.l) throw IoError("field l != n/2");
    if (j.contains("h") && j.at("h").get<int>() != p.h) throw IoError("field h is not minimal");
    return p;
  } catch (const DomainError& e) {
    throw IoError(e.what());
  }
}

// ---- orbit exchange ---------------------------------------------------------

struct OrbitFile {
  GeneratingLoop loop;
  std::optional<double> action;
  std::optional<double> min_pair_distance;
  std::vector<std::vector<int>> classes;

  bool operator==(const OrbitFile& o) const {
    return loop.params() == o.loop.params() && loop.nodes() == o.loop.nodes() &&
           action == o.action && min_pair_distance == o.min_pair_distance && classes == o.classes;
  }
};

inline OrbitFile make_orbit_file(const GeneratingLoop& loop, std::optional<double> action = {},
                                 std::optional<double> min_pair = {}) {
  return {loop, action, min_pair, choreography_classes(loop.params()).classes};
}

inline Json orbit_to_json(const OrbitFile& o) {
  const auto& p = o.loop.params();
  Json j = params_to_json(p);
  j["N"] = o.loop.N();
  Json nodes = Json::array();
  for (int i = 0; i <= o.loop.N(); ++i) {
    const auto& x = o.loop.node(i);
    nodes.push_back(Json::array({o.loop.time(i), x[0], x[1], x[2]}));
  }
  j["nodes"] = std::move(nodes);
  j["action"] = o.action ? Json(*o.action) : Json(nullptr);
  j["min_pair_distance"] = o.min_pair_distance ? Json(*o.min_pair_distance) : Json(nullptr);
  j["classes"] = o.classes;
  return j;
}

inline OrbitFile orbit_from_json(const Json& j) {
  if (!j.is_object()) throw IoError("orbit: expected an object");
  const auto p = params_from_json(j);
  const int N = detail::require<int>(j, "N");
  const auto& raw = j.contains("nodes") ? j.at("nodes") : throw IoError("missing field 'nodes'");
  if (!raw.is_array() || static_cast<int>(raw.size()) != N + 1)
    throw IoError("orbit: nodes must hold N + 1 rows");
  std::vector<Vec3> nodes;
  nodes.reserve(N + 1);
  const double dt = p.fundamental_length() / N;
  for (int i = 0; i <= N; ++i) {
    const auto& row = raw[i];
    if (!row.is_array() || row.size() != 4) throw IoError("orbit: node rows are [t, x, y, z]");
    for (const auto& v : row)
      if (!v.is_number()) throw IoError("orbit: non-numeric node entry");
    if (std::abs(row[0].get<double>() - i * dt) > 1e-9 * p.T)
      throw IoError("orbit: node times are not uniform on [0, T/2h]");
    nodes.emplace_back(row[1].get<double>(), row[2].get<double>(), row[3].get<double>());
  }
  auto opt = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
  };
  try {
    OrbitFile o{GeneratingLoop(p, std::move(nodes)), opt("action"), opt("min_pair_distance"),
                {}};
    o.classes = j.contains("classes") ? j.at("classes").get<std::vector<std::vector<int>>>()
                                      : choreography_classes(p).classes;
    return o;
  } catch (const DomainError& e) {
    throw IoError(std::string("orbit: ") + e.what());
  }
}

inline void write_orbit(const std::filesystem::path& path, const OrbitFile& o) {
  write_json(path, orbit_to_json(o));
}

inline OrbitFile read_orbit(const std::filesystem::path& path) {
  try {
    return orbit_from_json(read_json(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

// ---- estimate report --------------------------------------------------------

inline Json estimate_to_json(const EstimateReport& r) {
  Json params = params_to_json(r.params);
  params["remark8"] = r.remark8;
  params["N"] = r.N;
  return Json{{"params", params},
              {"B", r.B},
              {"test_loop", to_string(r.kind)},
              {"A_bound", r.A_bound},
              {"A_numeric", r.A_numeric},
              {"ratio", r.ratio_numeric},
              {"ratio_bound", r.ratio_bound},
              {"margin", r.margin()},
              {"verdict", r.verdict}};
}

inline EstimateReport estimate_from_json(const Json& j) {
  EstimateReport r;
  const auto& params = j.at("params");
  r.params = params_from_json(params);
  r.remark8 = params.value("remark8", false);
  r.N = params.value("N", 0);
  r.B = detail::require<double>(j, "B");
  r.kind = j.value("test_loop", std::string("s1_circles")) == "spherical"
               ? TestLoopKind::spherical
               : TestLoopKind::s1_circles;
  r.A_bound = detail::require<double>(j, "A_bound");
  r.A_numeric = detail::require<double>(j, "A_numeric");
  r.ratio_numeric = detail::require<double>(j, "ratio");
  r.ratio_bound = j.value("ratio_bound", r.A_bound / r.B);
  r.verdict = detail::require<bool>(j, "verdict");
  return r;
}

// ---- verification report ----------------------------------------------------

inline Json verification_to_json(const VerificationReport& r) {
  using detail::number_or_null;
  return Json{{"el_residual", number_or_null(r.el_residual)},
              {"el_residual_joins", number_or_null(r.el_residual_joins)},
              {"closure_error", number_or_null(r.closure_error)},
              {"closure_error_raw", number_or_null(r.closure_error_raw)},
              {"initial_data", r.initial_data},
              {"energy_drift", number_or_null(r.energy_drift)},
              {"angular_momentum_drift", number_or_null(r.angular_momentum_drift)},
              {"min_pair_distance", number_or_null(r.min_pair_distance)},
              {"symmetry_drift", number_or_null(r.symmetry_drift)},
              {"steps", r.steps},
              {"ok", r.ok},
              {"failure", r.failure}};
}

inline VerificationReport verification_from_json(const Json& j) {
  using detail::number_or_inf;
  VerificationReport r;
  r.el_residual = number_or_inf(j.at("el_residual"));
  r.el_residual_joins = number_or_inf(j.at("el_residual_joins"));
  r.closure_error = number_or_inf(j.at("closure_error"));
  r.closure_error_raw = number_or_inf(j.at("closure_error_raw"));
  r.initial_data = j.at("initial_data").get<std::string>();
  r.energy_drift = number_or_inf(j.at("energy_drift"));
  r.angular_momentum_drift = number_or_inf(j.at("angular_momentum_drift"));
  r.min_pair_distance = number_or_inf(j.at("min_pair_distance"));
  r.symmetry_drift = number_or_inf(j.at("symmetry_drift"));
  r.steps = j.at("steps").get<long>();
  r.ok = j.at("ok").get<bool>();
  r.failure = j.at("failure").get<std::string>();
  return r;
}

// ---- solver config ----------------------------------------------------------

/// SolveConfig plus the refinement ladder and an optional initial-loop path.
struct SolveJob {
  SolveConfig config;
  std::vector<int> refine;  // successive grid sizes after config.N, each a multiple of the last
  std::string initial_file;
};

inline InitialGuess initial_guess_from_string(const std::string& s) {
  if (s == "test_loop") return InitialGuess::test_loop;
  if (s == "perturbed_test_loop") return InitialGuess::perturbed_test_loop;
  if (s == "file") return InitialGuess::file;
  throw IoError("unknown initial_guess '" + s + "'");
}

inline Json solve_job_to_json(const SolveJob& job) {
  const auto& c = job.config;
  Json j{{"n", c.params.n},
         {"s", c.params.s},
         {"T", c.params.T},
         {"N", c.N},
         {"refine", job.refine},
         {"max_iters", c.max_iters},
         {"grad_tol", c.grad_tol},
         {"step",
          Json{{"initial_step", c.step.initial_step},
               {"backtrack", c.step.backtrack},
               {"armijo", c.step.armijo},
               {"max_halvings", c.step.max_halvings}}},
         {"memory", c.memory},
         {"seed", c.seed},
         {"initial_guess", to_string(c.initial_guess)},
         {"perturb_amplitude", c.perturb_amplitude},
         {"remark8", c.remark8}};
  if (!job.initial_file.empty()) j["initial_file"] = job.initial_file;
  return j;
}

/// Missing keys take SolveConfig defaults; parameters use the strict s <= l/2 rule.
inline SolveJob solve_job_from_json(const Json& j, bool force = false) {
  if (!j.is_object()) throw IoError("config: expected an object");
  SolveJob job;
  auto& c = job.config;
  try {
    const int n = detail::require<int>(j, "n"), s = detail::require<int>(j, "s");
    const double T = j.value("T", 1.0);
    c.params = force ? SymmetryParams::make_relaxed(n, s, T) : SymmetryParams::make(n, s, T);
    c.N = j.value("N", c.N);
    job.refine = j.value("refine", std::vector<int>{});
    c.max_iters = j.value("max_iters", c.max_iters);
    c.grad_tol = j.value("grad_tol", c.grad_tol);
    if (j.contains("step")) {
      const auto& st = j.at("step");
      c.step.initial_step = st.value("initial_step", c.step.initial_step);
      c.step.backtrack = st.value("backtrack", c.step.backtrack);
      c.step.armijo = st.value("armijo", c.step.armijo);
      c.step.max_halvings = st.value("max_halvings", c.step.max_halvings);
    }
    c.memory = j.value("memory", c.memory);
    c.seed = j.value("seed", c.seed);
    c.initial_guess = initial_guess_from_string(
        j.value("initial_guess", to_string(InitialGuess::perturbed_test_loop)));
    c.perturb_amplitude = j.value("perturb_amplitude", c.perturb_amplitude);
    c.remark8 = j.value("remark8", c.remark8);
    job.initial_file = j.value("initial_file", std::string{});
  } catch (const Json::exception& e) {
    throw IoError(std::string("config: ") + e.what());
  } catch (const DomainError& e) {
    throw IoError(std::string("config: ") + e.what());
  }
  if (c.initial_guess == InitialGuess::file && job.initial_file.empty())
    throw IoError("config: initial_guess = file needs initial_file");
  int prev = c.N;
  for (int N : job.refine) {
    if (N <= prev || N % prev != 0)
      throw IoError("config: each refine entry must be a larger multiple of the previous grid");
    prev = N;
  }
  return job;
}

// ---- manifest ---------------------------------------------------------------

struct RunManifest {
  std::string command;
  Json config = Json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string tool_version;
  double wall_time = 0.0;  // seconds
  Json verdicts = Json::object();
  int exit_code = 0;
  std::string failure;
};

inline Json manifest_to_json(const RunManifest& m) {
  return Json{{"command", m.command},       {"config", m.config},
              {"inputs", m.inputs},         {"outputs", m.outputs},
              {"tool_version", m.tool_version}, {"wall_time", m.wall_time},
              {"verdicts", m.verdicts},     {"exit_code", m.exit_code},
              {"failure", m.failure}};
}

}  // namespace dnbody
