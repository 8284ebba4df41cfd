#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "plap/exponents.hpp"
#include "plap/grid.hpp"
#include "plap/nonlinearity.hpp"
#include "plap/sources.hpp"
#include "plap/stationary.hpp"

namespace plap {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemConfig {
  double p = 1.6;
  double mu = 0.0;
  int n = 3;
  int N = 1;
  int m = 15;
  double T = 0.1;
  int steps = 64;
  double tau = 0.1 / 64;  // derived: T / steps
  double K = 1.0;
};

struct ModeConfig {
  std::array<int, 3> k{1, 1, 1};
  std::vector<double> coeff{1.0};
};

struct ProfileConfig {
  std::string kind = "constant";  // constant | spike-train
  double period = 0.1;
  double width = 0.01;
};

struct SolutionConfig {
  std::string kind = "sine-modes";  // sine-modes | poly-bump
  std::vector<ModeConfig> modes{ModeConfig{}};
  std::vector<double> amplitude{1.0};
};

struct ForcingConfig {
  std::string kind = "zero";  // zero | smooth-mode | rough-radial | manufactured
  double amplitude = 1.0;
  std::vector<ModeConfig> modes{ModeConfig{}};
  double beta = 1.4;
  std::array<double, 3> x0{0.5, 0.5, 0.5};
  std::vector<double> direction{1.0};
  ProfileConfig profile;
  SolutionConfig solution;
};

struct InitialConfig {
  std::string kind = "zero";  // zero | sine-modes | cusp
  std::vector<ModeConfig> modes{ModeConfig{}};
  double gamma = 0.5;
  std::array<double, 3> x0{0.5, 0.5, 0.5};
  std::vector<double> direction{1.0};
  double amplitude = 1.0;
};

struct SolverConfig {
  StationarySolveConfig stationary;
  double step_tol = 1e-10;  // per implicit step
};

struct MatrixConfig {
  std::vector<double> p;                  // empty: problem.p only
  std::vector<int> m;                     // empty: problem.m only
  std::vector<ForcingConfig> forcing;     // empty: the top-level forcing only
};

struct VerifyConfig {
  double slack = 1.05;
  double energy_rel_tol = 1e-6;
  double uniformity_max = 10.0;
  std::vector<double> mu_values{0.0, 1e-3, 1e-2, 1e-1, 1.0};
  double mu0 = 1.0;
  int levels = 6;
  int min_levels = 4;
  double min_order = 1.8;
  bool holder = true;
  bool t_scaling = false;
  std::vector<double> t_values;  // T sweep for the optional T-scaling study
  int c2_samples = 0;
  MatrixConfig matrix;
};

struct ConvergenceConfig {
  std::string study = "heat";  // heat | manufactured
  std::vector<int> m_values{15, 31};
  std::string tau_rule = "h2";  // h2: tau = h^2; fixed: problem tau
};

struct OutputConfig {
  std::string dir;  // empty: $PLAP_OUTPUT_ROOT/<subcommand> or ./plap-out/<subcommand>
  int stride = 0;
};

struct RunConfig {
  ProblemConfig problem;
  ForcingConfig forcing;
  InitialConfig initial;
  SolverConfig solver;
  VerifyConfig verify;
  ConvergenceConfig convergence;
  OutputConfig output;
  int jobs = 1;
  std::uint64_t seed = 0;
};

namespace config_detail {

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

/// Reads the members of one JSON object, tracking which keys were consumed so
/// that leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  const json* find(const std::string& key) {
    known_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  bool number(const std::string& key, double& out) {
    const json* v = find(key);
    if (!v) return false;
    if (!v->is_number()) fail(path(key), "expected a number");
    out = v->get<double>();
    if (!std::isfinite(out)) fail(path(key), "must be finite");
    return true;
  }

  bool integer(const std::string& key, int& out) {
    const json* v = find(key);
    if (!v) return false;
    if (!v->is_number_integer()) fail(path(key), "expected an integer");
    out = v->get<int>();
    return true;
  }

  bool unsigned_integer(const std::string& key, std::uint64_t& out) {
    const json* v = find(key);
    if (!v) return false;
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
      fail(path(key), "expected a non-negative integer");
    out = v->get<std::uint64_t>();
    return true;
  }

  bool boolean(const std::string& key, bool& out) {
    const json* v = find(key);
    if (!v) return false;
    if (!v->is_boolean()) fail(path(key), "expected true or false");
    out = v->get<bool>();
    return true;
  }

  bool string(const std::string& key, std::string& out, std::initializer_list<const char*> allowed) {
    const json* v = find(key);
    if (!v) return false;
    if (!v->is_string()) fail(path(key), "expected a string");
    out = v->get<std::string>();
    std::string list;
    for (const char* a : allowed) {
      if (out == a) return true;
      list += list.empty() ? a : std::string(", ") + a;
    }
    if (allowed.size() > 0) fail(path(key), "'" + out + "' is not one of: " + list);
    return true;
  }

  bool free_string(const std::string& key, std::string& out) { return string(key, out, {}); }

  bool numbers(const std::string& key, std::vector<double>& out) {
    const json* v = find(key);
    if (!v) return false;
    if (!v->is_array()) fail(path(key), "expected an array of numbers");
    out.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number()) fail(path(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back((*v)[i].get<double>());
    }
    return true;
  }

  bool integers(const std::string& key, std::vector<int>& out) {
    const json* v = find(key);
    if (!v) return false;
    if (!v->is_array()) fail(path(key), "expected an array of integers");
    out.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number_integer())
        fail(path(key) + "[" + std::to_string(i) + "]", "expected an integer");
      out.push_back((*v)[i].get<int>());
    }
    return true;
  }

  bool point(const std::string& key, std::array<double, 3>& out) {
    std::vector<double> v;
    if (!numbers(key, v)) return false;
    if (v.empty() || v.size() > 3) fail(path(key), "expected 1 to 3 coordinates");
    out = {0.5, 0.5, 0.5};
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
    return true;
  }

  template <class F>
  bool object(const std::string& key, F&& parse) {
    const json* v = find(key);
    if (!v) return false;
    ObjectReader sub(*v, path(key));
    parse(sub);
    sub.finish();
    return true;
  }

  template <class F>
  bool objects(const std::string& key, F&& parse) {
    const json* v = find(key);
    if (!v) return false;
    if (!v->is_array()) fail(path(key), "expected an array of objects");
    for (std::size_t i = 0; i < v->size(); ++i) {
      ObjectReader sub((*v)[i], path(key) + "[" + std::to_string(i) + "]");
      parse(sub);
      sub.finish();
    }
    return true;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!known_.count(it.key())) fail(path(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> known_;
};

inline void read_mode(ObjectReader& r, ModeConfig& md) {
  std::vector<int> k;
  if (r.integers("k", k)) {
    if (k.empty() || k.size() > 3) ObjectReader::fail(r.path("k"), "expected 1 to 3 wave numbers");
    md.k = {1, 1, 1};
    for (std::size_t i = 0; i < k.size(); ++i) {
      if (k[i] < 1) ObjectReader::fail(r.path("k"), "wave numbers must be >= 1");
      md.k[i] = k[i];
    }
  }
  r.numbers("coeff", md.coeff);
}

inline void read_modes(ObjectReader& r, const std::string& key, std::vector<ModeConfig>& modes) {
  std::vector<ModeConfig> out;
  if (r.objects(key, [&](ObjectReader& s) {
        ModeConfig md;
        read_mode(s, md);
        out.push_back(md);
      }))
    modes = std::move(out);
}

inline void read_profile(ObjectReader& r, ProfileConfig& pc) {
  r.string("kind", pc.kind, {"constant", "spike-train"});
  r.number("period", pc.period);
  r.number("width", pc.width);
}

inline void read_solution(ObjectReader& r, SolutionConfig& sc) {
  r.string("kind", sc.kind, {"sine-modes", "poly-bump"});
  read_modes(r, "modes", sc.modes);
  r.numbers("amplitude", sc.amplitude);
}

inline void read_forcing(ObjectReader& r, ForcingConfig& fc) {
  r.string("kind", fc.kind, {"zero", "smooth-mode", "rough-radial", "manufactured"});
  r.number("amplitude", fc.amplitude);
  read_modes(r, "modes", fc.modes);
  r.number("beta", fc.beta);
  r.point("x0", fc.x0);
  r.numbers("direction", fc.direction);
  r.object("profile", [&](ObjectReader& s) { read_profile(s, fc.profile); });
  r.object("solution", [&](ObjectReader& s) { read_solution(s, fc.solution); });
}

inline void read_initial(ObjectReader& r, InitialConfig& ic) {
  r.string("kind", ic.kind, {"zero", "sine-modes", "cusp"});
  read_modes(r, "modes", ic.modes);
  r.number("gamma", ic.gamma);
  r.point("x0", ic.x0);
  r.numbers("direction", ic.direction);
  r.number("amplitude", ic.amplitude);
}

inline void check(bool ok, const std::string& where, const std::string& what) {
  if (!ok) ObjectReader::fail(where, what);
}

inline void validate_modes(const std::vector<ModeConfig>& modes, int N, const std::string& where) {
  check(!modes.empty(), where, "at least one mode is required");
  for (std::size_t i = 0; i < modes.size(); ++i)
    check(static_cast<int>(modes[i].coeff.size()) == N, where + "[" + std::to_string(i) + "].coeff",
          "needs N = " + std::to_string(N) + " components");
}

inline void validate_direction(const std::vector<double>& d, int N, const std::string& where) {
  check(static_cast<int>(d.size()) == N, where, "needs N = " + std::to_string(N) + " components");
  double s = 0.0;
  for (double v : d) s += v * v;
  check(s > 0.0, where, "must be a nonzero vector");
}

inline void validate_forcing(const ForcingConfig& fc, const ProblemConfig& pb, const std::string& where) {
  if (fc.kind == "smooth-mode") validate_modes(fc.modes, pb.N, where + ".modes");
  if (fc.kind == "rough-radial") {
    check(fc.beta >= 0.0 && fc.beta < 0.5 * pb.n, where + ".beta",
          "must satisfy 0 <= beta < n/2 = " + std::to_string(0.5 * pb.n) +
              " so that the forcing stays square integrable");
    validate_direction(fc.direction, pb.N, where + ".direction");
    for (int d = 0; d < pb.n; ++d)
      check(fc.x0[d] > 0.0 && fc.x0[d] < 1.0, where + ".x0", "must lie inside the unit box");
  }
  if (fc.kind == "manufactured") {
    if (fc.solution.kind == "sine-modes") validate_modes(fc.solution.modes, pb.N, where + ".solution.modes");
    else
      check(static_cast<int>(fc.solution.amplitude.size()) == pb.N, where + ".solution.amplitude",
            "needs N = " + std::to_string(pb.N) + " components");
  }
  if (fc.profile.kind == "spike-train")
    check(fc.profile.period > 0.0 && fc.profile.width > 0.0 && fc.profile.width <= fc.profile.period,
          where + ".profile", "spike train needs 0 < width <= period");
}

inline void validate(RunConfig& c) {
  auto& pb = c.problem;
  try {
    NonlinearityParams{pb.p, pb.mu}.validate();
  } catch (const std::invalid_argument& e) {
    ObjectReader::fail(pb.p > 1.0 && pb.p <= 2.0 ? "problem.mu" : "problem.p", e.what());
  }
  check(pb.n >= 1 && pb.n <= 3, "problem.n", "must be 1, 2 or 3");
  check(pb.m >= 3, "problem.m", "must be >= 3");
  check(pb.N >= 1, "problem.N", "must be >= 1");
  check(pb.K > 0.0, "problem.K", "must be positive");
  check(pb.T > 0.0, "problem.T", "must be positive");
  check(pb.steps >= 1, "problem.steps", "must be >= 1");

  validate_forcing(c.forcing, pb, "forcing");
  for (std::size_t i = 0; i < c.verify.matrix.forcing.size(); ++i)
    validate_forcing(c.verify.matrix.forcing[i], pb, "verify.matrix.forcing[" + std::to_string(i) + "]");
  for (std::size_t i = 0; i < c.verify.matrix.p.size(); ++i) {
    const double p = c.verify.matrix.p[i];
    check(p > 1.0 && p <= 2.0, "verify.matrix.p[" + std::to_string(i) + "]", "p must satisfy 1 < p <= 2");
  }
  for (std::size_t i = 0; i < c.verify.matrix.m.size(); ++i)
    check(c.verify.matrix.m[i] >= 3, "verify.matrix.m[" + std::to_string(i) + "]", "must be >= 3");

  const auto& ic = c.initial;
  if (ic.kind == "sine-modes") validate_modes(ic.modes, pb.N, "initial.modes");
  if (ic.kind == "cusp") {
    check(ic.gamma > 0.0 && ic.gamma > 1.0 - pb.n / pb.p, "initial.gamma",
          "must satisfy gamma > max(0, 1 - n/p) so that grad u0 is in L^p");
    validate_direction(ic.direction, pb.N, "initial.direction");
  }

  try {
    c.solver.stationary.validate();
  } catch (const std::invalid_argument& e) {
    ObjectReader::fail("solver", e.what());
  }
  check(c.solver.step_tol > 0.0, "solver.step_tol", "must be positive");

  auto& v = c.verify;
  check(v.slack >= 1.0, "verify.slack", "must be >= 1");
  check(v.energy_rel_tol >= 0.0, "verify.energy_rel_tol", "must be >= 0");
  check(v.uniformity_max >= 1.0, "verify.uniformity_max", "must be >= 1");
  for (double mu : v.mu_values) check(mu >= 0.0, "verify.mu_values", "entries must be >= 0");
  check(v.mu0 > 0.0, "verify.mu0", "must be positive");
  check(v.levels >= 1, "verify.levels", "must be >= 1");
  check(v.min_levels >= 1 && v.min_levels <= v.levels, "verify.min_levels", "must lie in [1, levels]");
  check(v.c2_samples >= 0, "verify.c2_samples", "must be >= 0");
  for (double T : v.t_values) check(T > 0.0, "verify.t_values", "entries must be positive");

  check(!c.convergence.m_values.empty(), "convergence.m_values", "must not be empty");
  for (int m : c.convergence.m_values) check(m >= 3, "convergence.m_values", "entries must be >= 3");
  check(c.output.stride >= 0, "output.stride", "must be >= 0");
  check(c.jobs >= 1, "jobs", "must be >= 1");
}

inline std::string locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace config_detail

/// Parses and validates a run configuration. Missing keys take defaults;
/// unknown keys are errors. The time grid accepts any two of T, steps, tau.
inline RunConfig parse_config_text(const std::string& text) {
  using config_detail::ObjectReader;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON at " + config_detail::locate(text, e.byte) + ": " + e.what());
  }
  RunConfig c;
  ObjectReader r(j, "");
  bool has_tau = false, has_steps = false, has_T = false;
  r.object("problem", [&](ObjectReader& s) {
    auto& pb = c.problem;
    s.number("p", pb.p);
    s.number("mu", pb.mu);
    s.integer("n", pb.n);
    s.integer("N", pb.N);
    s.integer("m", pb.m);
    has_T = s.number("T", pb.T);
    has_steps = s.integer("steps", pb.steps);
    has_tau = s.number("tau", pb.tau);
    s.number("K", pb.K);
  });
  r.object("forcing", [&](ObjectReader& s) { config_detail::read_forcing(s, c.forcing); });
  r.object("initial", [&](ObjectReader& s) { config_detail::read_initial(s, c.initial); });
  r.object("solver", [&](ObjectReader& s) {
    auto& st = c.solver.stationary;
    s.number("tol", st.tol);
    s.number("step_tol", c.solver.step_tol);
    s.integer("max_outer", st.max_outer);
    s.numbers("eps_schedule", st.eps_schedule);
    s.number("inner_tol", st.inner_tol);
    s.number("inner_reduction", st.inner_reduction);
    s.integer("inner_max", st.inner_max);
  });
  r.object("verify", [&](ObjectReader& s) {
    auto& v = c.verify;
    s.number("slack", v.slack);
    s.number("energy_rel_tol", v.energy_rel_tol);
    s.number("uniformity_max", v.uniformity_max);
    s.numbers("mu_values", v.mu_values);
    s.number("mu0", v.mu0);
    s.integer("levels", v.levels);
    s.integer("min_levels", v.min_levels);
    s.number("min_order", v.min_order);
    s.boolean("holder", v.holder);
    s.boolean("t_scaling", v.t_scaling);
    s.numbers("t_values", v.t_values);
    s.integer("c2_samples", v.c2_samples);
    s.object("matrix", [&](ObjectReader& mr) {
      mr.numbers("p", v.matrix.p);
      mr.integers("m", v.matrix.m);
      mr.objects("forcing", [&](ObjectReader& fr) {
        ForcingConfig fc;
        config_detail::read_forcing(fr, fc);
        v.matrix.forcing.push_back(fc);
      });
    });
  });
  r.object("convergence", [&](ObjectReader& s) {
    s.string("study", c.convergence.study, {"heat", "manufactured"});
    s.integers("m_values", c.convergence.m_values);
    s.string("tau_rule", c.convergence.tau_rule, {"h2", "fixed"});
  });
  r.object("output", [&](ObjectReader& s) {
    s.free_string("dir", c.output.dir);
    s.integer("stride", c.output.stride);
  });
  r.integer("jobs", c.jobs);
  r.unsigned_integer("seed", c.seed);
  r.finish();

  auto& pb = c.problem;
  if (has_tau && !(pb.tau > 0.0)) ObjectReader::fail("problem.tau", "must be positive");
  if (has_tau && has_steps && has_T) {
    if (std::abs(pb.tau * pb.steps - pb.T) > 1e-9 * pb.T)
      ObjectReader::fail("problem", "T, steps and tau are inconsistent (need T = steps * tau)");
  } else if (has_tau && has_steps) {
    pb.T = pb.tau * pb.steps;
  } else if (has_tau) {
    const double s = std::round(pb.T / pb.tau);
    if (s < 1.0 || std::abs(s * pb.tau - pb.T) > 1e-9 * pb.T)
      ObjectReader::fail("problem.tau", "T must be an integer multiple of tau");
    pb.steps = static_cast<int>(s);
  }
  if (!has_tau && pb.steps >= 1) pb.tau = pb.T / pb.steps;
  config_detail::validate(c);
  return c;
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

namespace config_detail {
inline json modes_json(const std::vector<ModeConfig>& modes) {
  json a = json::array();
  for (const auto& md : modes) a.push_back({{"k", md.k}, {"coeff", md.coeff}});
  return a;
}

inline json forcing_json(const ForcingConfig& f) {
  return {{"kind", f.kind},
          {"amplitude", f.amplitude},
          {"modes", modes_json(f.modes)},
          {"beta", f.beta},
          {"x0", f.x0},
          {"direction", f.direction},
          {"profile", {{"kind", f.profile.kind}, {"period", f.profile.period}, {"width", f.profile.width}}},
          {"solution",
           {{"kind", f.solution.kind},
            {"modes", modes_json(f.solution.modes)},
            {"amplitude", f.solution.amplitude}}}};
}
}  // namespace config_detail

/// Fully resolved configuration, defaults included. Parsing the echo gives
/// back the same configuration.
inline json to_json(const RunConfig& c) {
  using namespace config_detail;
  const auto& pb = c.problem;
  const auto& st = c.solver.stationary;
  const auto& v = c.verify;
  json matrix_forcing = json::array();
  for (const auto& f : v.matrix.forcing) matrix_forcing.push_back(forcing_json(f));
  return {
      {"problem",
       {{"p", pb.p}, {"mu", pb.mu}, {"n", pb.n}, {"N", pb.N}, {"m", pb.m}, {"T", pb.T}, {"steps", pb.steps},
        {"tau", pb.tau}, {"K", pb.K}}},
      {"forcing", forcing_json(c.forcing)},
      {"initial",
       {{"kind", c.initial.kind},
        {"modes", modes_json(c.initial.modes)},
        {"gamma", c.initial.gamma},
        {"x0", c.initial.x0},
        {"direction", c.initial.direction},
        {"amplitude", c.initial.amplitude}}},
      {"solver",
       {{"tol", st.tol},
        {"step_tol", c.solver.step_tol},
        {"max_outer", st.max_outer},
        {"eps_schedule", st.eps_schedule},
        {"inner_tol", st.inner_tol},
        {"inner_reduction", st.inner_reduction},
        {"inner_max", st.inner_max}}},
      {"verify",
       {{"slack", v.slack},
        {"energy_rel_tol", v.energy_rel_tol},
        {"uniformity_max", v.uniformity_max},
        {"mu_values", v.mu_values},
        {"mu0", v.mu0},
        {"levels", v.levels},
        {"min_levels", v.min_levels},
        {"min_order", v.min_order},
        {"holder", v.holder},
        {"t_scaling", v.t_scaling},
        {"t_values", v.t_values},
        {"c2_samples", v.c2_samples},
        {"matrix", {{"p", v.matrix.p}, {"m", v.matrix.m}, {"forcing", matrix_forcing}}}}},
      {"convergence",
       {{"study", c.convergence.study},
        {"m_values", c.convergence.m_values},
        {"tau_rule", c.convergence.tau_rule}}},
      {"output", {{"dir", c.output.dir}, {"stride", c.output.stride}}},
      {"jobs", c.jobs},
      {"seed", c.seed}};
}

/// 64-bit FNV-1a of the canonical echo with output.dir and jobs removed, as
/// 16 lowercase hex digits. Neither field changes any computed number.
inline std::string config_hash(const RunConfig& c) {
  json j = to_json(c);
  j["output"].erase("dir");
  j.erase("jobs");
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = hex[h & 0xf];
  return out;
}

inline Grid make_grid(const ProblemConfig& pb) { return Grid(pb.n, pb.m); }

inline std::vector<SineMode> to_modes(const std::vector<ModeConfig>& modes) {
  std::vector<SineMode> out;
  for (const auto& md : modes) out.push_back({md.k, md.coeff});
  return out;
}

inline TimeProfile to_profile(const ForcingConfig& fc) {
  TimeProfile tp;
  tp.kind = fc.profile.kind == "spike-train" ? TimeProfile::Kind::SpikeTrain : TimeProfile::Kind::Constant;
  tp.amplitude = fc.amplitude;
  tp.period = fc.profile.period;
  tp.width = fc.profile.width;
  return tp;
}

inline AnalyticField manufactured_solution(const SolutionConfig& sc, int n) {
  if (sc.kind == "poly-bump") return poly_bump(n, sc.amplitude);
  return sine_modes(n, to_modes(sc.modes));
}

/// Spatial shape of the forcing (time profile excluded, amplitude excluded).
inline VectorField forcing_shape(const ForcingConfig& fc, const Grid& g, int N, const NonlinearityParams& prm) {
  if (fc.kind == "zero") return VectorField(g, N);
  if (fc.kind == "smooth-mode") return sample(g, sine_modes(g.n, to_modes(fc.modes)));
  if (fc.kind == "rough-radial") return rough_radial_shape(g, {fc.x0, fc.beta, fc.direction});
  return manufactured_forcing(g, manufactured_solution(fc.solution, g.n), prm);
}

inline Forcing make_forcing(const ForcingConfig& fc, const Grid& g, int N, const NonlinearityParams& prm) {
  return {forcing_shape(fc, g, N, prm), to_profile(fc)};
}

/// Time-independent forcing for stationary solves: amplitude times shape.
inline VectorField stationary_forcing(const ForcingConfig& fc, const Grid& g, int N,
                                      const NonlinearityParams& prm) {
  return fc.amplitude * forcing_shape(fc, g, N, prm);
}

inline VectorField make_initial(const InitialConfig& ic, const Grid& g, int N, double p) {
  if (ic.kind == "zero") return VectorField(g, N);
  if (ic.kind == "sine-modes") return sample(g, sine_modes(g.n, to_modes(ic.modes)));
  return sample(g, cusp_initial(g.n, p, ic.gamma, ic.x0, ic.direction, ic.amplitude));
}

}  // namespace plap
