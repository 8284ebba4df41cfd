#pragma once

#include <charconv>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "plap/c2_estimate.hpp"
#include "plap/config.hpp"
#include "plap/estimates.hpp"
#include "plap/exponents.hpp"
#include "plap/field_io.hpp"
#include "plap/norms.hpp"
#include "plap/parabolic.hpp"
#include "plap/sources.hpp"
#include "plap/stationary.hpp"

namespace plap {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitMargin = 2, kExitNonConvergence = 3, kExitConfig = 4 };

inline const std::vector<std::pair<std::string, std::string>>& subcommand_help() {
  static const std::vector<std::pair<std::string, std::string>> help{
      {"check-exponents", "core exponent, admissibility conditions and C2 lower estimate"},
      {"solve-stationary", "stationary solve with W2q implied constant"},
      {"solve-parabolic", "implicit Euler gradient flow with energy ledger and snapshots"},
      {"verify-estimates", "audit gradient estimates on a run matrix or a finished run"},
      {"convergence-study", "refinement ladder for the heat or manufactured benchmark"},
      {"mu-sweep", "mu -> 0 Cauchy table and implied-constant uniformity in mu"}};
  return help;
}

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, _] : subcommand_help()) v.push_back(name);
    return v;
  }();
  return names;
}

namespace app {

namespace fs = std::filesystem;

/// Shortest round-trip text for a double.
inline std::string num(double v) { return fmt::format("{}", v); }

struct Context {
  RunConfig cfg;
  std::string hash;
  fs::path out;
  std::ostream* log = nullptr;
  std::optional<fs::path> run_dir;  // verify-estimates on a finished run

  void say(const std::string& s) const {
    if (log) *log << s << '\n';
  }
  /// Non-empty for runs below the dimension the regularity theory covers.
  std::string scope() const { return cfg.problem.n < 3 ? "outside theory hypotheses (n >= 3)" : ""; }
  std::string stamp() const {
    const std::string s = scope();
    return fmt::format("# tool_version={} config_hash={}{}\n", kToolVersion, hash, s.empty() ? "" : " scope=" + s);
  }
  FieldHeader field_header(double tau, int step, double t) const {
    return {0, 0, 0, tau, step, t, hash, kToolVersion};
  }
};

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

inline void write_json(const Context& ctx, const fs::path& path, nlohmann::json j) {
  j["tool_version"] = kToolVersion;
  j["config_hash"] = ctx.hash;
  if (const auto s = ctx.scope(); !s.empty()) j["scope"] = s;
  write_text(path, j.dump(2) + "\n");
}

inline nlohmann::json opt_num(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

/// Runs fn(0..count-1) on up to `jobs` threads. Results must be stored by
/// index so the output does not depend on scheduling.
inline void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::mutex mtx;
  int next = 0;
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min(jobs, count); ++w)
    pool.emplace_back([&] {
      while (true) {
        int i;
        {
          std::lock_guard<std::mutex> lk(mtx);
          if (next >= count) return;
          i = next++;
        }
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------- records

inline nlohmann::json record_json(const EstimateRecord& r) {
  return {{"id", r.id},
          {"convention", r.convention},
          {"lhs", r.lhs},
          {"rhs", r.rhs},
          {"margin", opt_num(r.margin)},
          {"implied_c", opt_num(r.implied_c)},
          {"pass", r.pass ? nlohmann::json(*r.pass) : nlohmann::json(nullptr)},
          {"note", r.note},
          {"p", r.meta.p},
          {"mu", r.meta.mu},
          {"n", r.meta.n},
          {"m", r.meta.m},
          {"h", r.meta.h},
          {"tau", r.meta.tau},
          {"T", r.meta.T},
          {"seed", r.meta.seed},
          {"label", r.meta.label}};
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline std::string records_csv(const Context& ctx, const std::vector<EstimateRecord>& recs) {
  std::string s = ctx.stamp();
  s += "id,convention,lhs,rhs,margin,implied_c,pass,p,mu,n,m,h,tau,T,seed,label,note\n";
  auto o = [](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
  for (const auto& r : recs)
    s += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.id, r.convention, num(r.lhs),
                     num(r.rhs), o(r.margin), o(r.implied_c), r.pass ? (*r.pass ? "true" : "false") : "",
                     num(r.meta.p), num(r.meta.mu), r.meta.n, r.meta.m, num(r.meta.h), num(r.meta.tau),
                     num(r.meta.T), r.meta.seed, csv_field(r.meta.label), csv_field(r.note));
  return s;
}

inline nlohmann::json sweep_json(const SweepReport& rep) {
  nlohmann::json recs = nlohmann::json::array(), uni = nlohmann::json::array();
  for (const auto& r : rep.records) recs.push_back(record_json(r));
  for (const auto& u : rep.uniformity)
    uni.push_back({{"id", u.id},
                   {"max_implied_c", u.max_c},
                   {"min_implied_c", u.min_c},
                   {"ratio", u.ratio},
                   {"count", u.count},
                   {"pass", u.pass}});
  int failed = 0;
  for (const auto& r : rep.records)
    if (r.pass && !*r.pass) ++failed;
  return {{"records", recs}, {"uniformity", uni}, {"failed_records", failed}, {"all_pass", rep.all_pass()}};
}

inline void write_sweep(const Context& ctx, const SweepReport& rep, const std::string& stem) {
  write_json(ctx, ctx.out / (stem + ".json"), sweep_json(rep));
  write_text(ctx.out / (stem + ".csv"), records_csv(ctx, rep.records));
}

// ---------------------------------------------------------- parabolic I/O

inline std::string ledger_csv(const Context& ctx, const EnergyLedger& ledger) {
  std::string s = ctx.stamp();
  s += fmt::format("# tau={} E0={} grad_pow0={}\n", num(ledger.tau), num(ledger.E0), num(ledger.grad_pow0));
  s += "k,t,E,D,F,dtnorm,margin,E_before,grad_pow,residual,iterations\n";
  for (const auto& e : ledger.entries)
    s += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", e.k, num(e.t), num(e.E), num(e.D), num(e.F),
                     num(e.dtnorm), num(e.margin), num(e.E_before), num(e.grad_pow), num(e.residual),
                     e.iterations);
  return s;
}

inline std::vector<double> split_numbers(const std::string& line) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const std::size_t end = std::min(line.find(',', pos), line.size());
    double v = 0.0;
    const auto res = std::from_chars(line.data() + pos, line.data() + end, v);
    if (res.ec != std::errc() || res.ptr != line.data() + end)
      throw std::runtime_error("ledger: cannot parse '" + line.substr(pos, end - pos) + "'");
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

inline EnergyLedger read_ledger(const fs::path& path, const nlohmann::json& summary) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  EnergyLedger L;
  L.tau = summary.at("tau").get<double>();
  L.E0 = summary.at("E0").get<double>();
  L.grad_pow0 = summary.at("grad_pow0").get<double>();
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    const auto v = split_numbers(line);
    if (v.size() != 11) throw std::runtime_error("ledger: expected 11 columns in " + path.string());
    LedgerEntry e;
    e.k = static_cast<int>(v[0]);
    e.t = v[1];
    e.E = v[2];
    e.D = v[3];
    e.F = v[4];
    e.dtnorm = v[5];
    e.margin = v[6];
    e.E_before = v[7];
    e.grad_pow = v[8];
    e.residual = v[9];
    e.iterations = static_cast<int>(v[10]);
    L.entries.push_back(e);
  }
  return L;
}

inline std::string snapshot_name(int step) { return fmt::format("u_{:06d}.field", step); }

inline Trajectory read_snapshots(const fs::path& dir, double tau) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".field") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  Trajectory tr;
  tr.tau = tau;
  for (const auto& f : files) {
    auto ff = load_field(f.string());
    tr.push(ff.header.step, ff.header.t, std::move(ff.field));
  }
  return tr;
}

// ------------------------------------------------------------- solve jobs

inline ParabolicRunConfig parabolic_config(const RunConfig& c) {
  ParabolicRunConfig pc;
  pc.tau = c.problem.tau;
  pc.steps = c.problem.steps;
  pc.step = c.solver.stationary;
  pc.step.tol = c.solver.step_tol;
  pc.stride = c.output.stride;
  return pc;
}

struct ParabolicJob {
  NonlinearityParams prm;
  RunConfig cfg;  // problem / forcing used for this job
  std::string label;
};

struct ParabolicOutcome {
  ParabolicRun run;
  std::vector<EstimateRecord> records;
};

inline ParabolicOutcome run_parabolic_job(const ParabolicJob& job, const VerifyOptions& vo, bool holder) {
  const Grid g = make_grid(job.cfg.problem);
  const int N = job.cfg.problem.N;
  const VectorField u0 = make_initial(job.cfg.initial, g, N, job.prm.p);
  const Forcing f = make_forcing(job.cfg.forcing, g, N, job.prm);
  ParabolicOutcome out;
  out.run = solve_parabolic(u0, as_source(f), parabolic_config(job.cfg), job.prm);
  if (!out.run.complete()) return out;
  VerifyOptions o = vo;
  o.label = job.label;
  out.records = verify_run(out.run.trajectory, out.run.ledger, job.prm, o);
  if (holder)
    if (auto h = holder_sanity(out.run.trajectory, job.prm, o)) out.records.push_back(*h);
  return out;
}

inline VerifyOptions verify_options(const RunConfig& c) {
  VerifyOptions o;
  o.slack = c.verify.slack;
  o.energy_rel_tol = c.verify.energy_rel_tol;
  o.seed = c.seed;
  return o;
}

inline std::string forcing_label(const ForcingConfig& f) {
  if (f.kind == "rough-radial") return fmt::format("rough-radial(beta={})", num(f.beta));
  return f.kind;
}

// ------------------------------------------------------------ subcommands

inline int cmd_check_exponents(const Context& ctx) {
  const auto& pb = ctx.cfg.problem;
  const auto r = exponent_report(pb.p, pb.n, pb.K);
  nlohmann::json j = {{"p", r.p},
                      {"n", r.n},
                      {"K", r.K},
                      {"q_hat", r.q_hat},
                      {"r_of_q_hat", r.r_of_q_hat},
                      {"bunov_ok", r.bunov_ok},
                      {"bunov_margin", r.bunov_margin},
                      {"c2_used", r.c2_used},
                      {"kkapas_ok", r.kkapas_ok},
                      {"kkapas_margin", r.kkapas_margin},
                      {"oras_ok", r.oras_ok},
                      {"oras_margin", r.oras_margin},
                      {"bolas_ok", r.bolas_ok},
                      {"bolas_margin", r.bolas_margin},
                      {"holder_alpha", opt_num(r.holder_alpha)},
                      {"near_degenerate", r.near_degenerate}};
  if (ctx.cfg.verify.c2_samples > 0)
    j["c2_lower_estimate"] = estimate_c2_lower(make_grid(pb), r.q_hat, ctx.cfg.verify.c2_samples, ctx.cfg.seed);
  write_json(ctx, ctx.out / "exponents.json", j);
  ctx.say(fmt::format("q_hat = {}  r(q_hat) = {}  bunov {}  kkapas {}  oras {}", num(r.q_hat), num(r.r_of_q_hat),
                      r.bunov_ok, r.kkapas_ok, r.oras_ok));
  return kExitOk;
}

inline int cmd_solve_stationary(const Context& ctx) {
  const auto& c = ctx.cfg;
  const Grid g = make_grid(c.problem);
  const NonlinearityParams prm{c.problem.p, c.problem.mu};
  const VectorField f = stationary_forcing(c.forcing, g, c.problem.N, prm);
  StationaryResult res;
  bool converged = true;
  std::string failure;
  try {
    res = solve_stationary(f, prm, c.solver.stationary);
  } catch (const NonConvergence& e) {
    res = e.best();
    converged = false;
    failure = e.what();
  }
  save_field((ctx.out / "u.field").string(), res.u, ctx.field_header(0.0, 0, 0.0));
  nlohmann::json j = {{"converged", converged},
                      {"failure", failure},
                      {"residual", res.residual},
                      {"iterations", res.iterations},
                      {"linear_iterations", res.linear_iterations},
                      {"energy", res.energy},
                      {"descent_ok", res.descent_ok},
                      {"residual_history", res.residual_history}};
  if (c.forcing.kind == "manufactured") {
    const VectorField exact = sample(g, manufactured_solution(c.forcing.solution, g.n));
    j["manufactured_w1p_rel_error"] = flux_w1p_norm(res.u - exact, prm.p) / flux_w1p_norm(exact, prm.p);
  }
  if (converged && g.n >= 3) {
    VerifyOptions o = verify_options(c);
    j["dnq"] = record_json(verify_dnq(res.u, f, prm, o));
  }
  write_json(ctx, ctx.out / "result.json", j);
  ctx.say(fmt::format("residual {}  iterations {}  converged {}", num(res.residual), res.iterations, converged));
  return converged ? kExitOk : kExitNonConvergence;
}

inline int cmd_solve_parabolic(const Context& ctx) {
  const auto& c = ctx.cfg;
  const Grid g = make_grid(c.problem);
  const NonlinearityParams prm{c.problem.p, c.problem.mu};
  const VectorField u0 = make_initial(c.initial, g, c.problem.N, prm.p);
  const Forcing f = make_forcing(c.forcing, g, c.problem.N, prm);
  const auto run = solve_parabolic(u0, as_source(f), parabolic_config(c), prm);

  fs::create_directories(ctx.out / "snapshots");
  for (std::size_t j = 0; j < run.trajectory.snapshots.size(); ++j)
    save_field((ctx.out / "snapshots" / snapshot_name(run.trajectory.steps[j])).string(),
               run.trajectory.snapshots[j],
               ctx.field_header(run.trajectory.tau, run.trajectory.steps[j], run.trajectory.times[j]));
  write_text(ctx.out / "ledger.csv", ledger_csv(ctx, run.ledger));

  const auto chk = check_energy_inequality(run.ledger);
  const bool energy_ok = chk.ok(c.verify.energy_rel_tol);
  int total_iters = 0;
  for (const auto& e : run.ledger.entries) total_iters += e.iterations;
  nlohmann::json j = {{"complete", run.complete()},
                      {"failure", run.failure.value_or("")},
                      {"failed_step", run.failed_step},
                      {"tau", run.ledger.tau},
                      {"steps", c.problem.steps},
                      {"steps_done", run.ledger.entries.size()},
                      {"T", c.problem.T},
                      {"E0", run.ledger.E0},
                      {"grad_pow0", run.ledger.grad_pow0},
                      {"E_final", run.ledger.entries.empty() ? run.ledger.E0 : run.ledger.entries.back().E},
                      {"energy_worst_relative_margin", chk.worst_relative},
                      {"energy_cumulative_margin", chk.cumulative},
                      {"energy_reference", chk.reference},
                      {"energy_ok", energy_ok},
                      {"outer_iterations", total_iters},
                      {"snapshots", run.trajectory.snapshots.size()}};
  write_json(ctx, ctx.out / "summary.json", j);
  ctx.say(fmt::format("steps {}/{}  worst relative margin {}  complete {}", run.ledger.entries.size(),
                      c.problem.steps, num(chk.worst_relative), run.complete()));
  if (!run.complete()) return kExitNonConvergence;
  return energy_ok ? kExitOk : kExitMargin;
}

inline int cmd_verify_run_dir(const Context& ctx) {
  const fs::path dir = *ctx.run_dir;
  std::ifstream sf(dir / "summary.json");
  if (!sf) throw ConfigError("run directory " + dir.string() + " has no summary.json");
  const auto summary = nlohmann::json::parse(sf);
  std::ifstream cf(dir / "config.json");
  std::stringstream cs;
  cs << cf.rdbuf();
  nlohmann::json run_cfg_json = nlohmann::json::parse(cs.str());
  run_cfg_json.erase("tool_version");
  run_cfg_json.erase("config_hash");
  run_cfg_json.erase("scope");
  const RunConfig run_cfg = parse_config_text(run_cfg_json.dump());
  if (!summary.at("complete").get<bool>()) {
    ctx.say("run did not complete; nothing to verify");
    return kExitNonConvergence;
  }
  const auto ledger = read_ledger(dir / "ledger.csv", summary);
  const auto traj = read_snapshots(dir / "snapshots", ledger.tau);
  const NonlinearityParams prm{run_cfg.problem.p, run_cfg.problem.mu};
  VerifyOptions o = verify_options(ctx.cfg);
  o.seed = run_cfg.seed;
  o.label = dir.filename().string();
  SweepReport rep;
  rep.records = verify_run(traj, ledger, prm, o);
  if (ctx.cfg.verify.holder)
    if (auto h = holder_sanity(traj, prm, o)) rep.records.push_back(*h);
  sort_records(rep.records);
  write_sweep(ctx, rep, "estimates");
  ctx.say(fmt::format("{} records, all pass {}", rep.records.size(), rep.all_pass()));
  return rep.all_pass() ? kExitOk : kExitMargin;
}

inline int cmd_verify_estimates(const Context& ctx) {
  if (ctx.run_dir) return cmd_verify_run_dir(ctx);
  const auto& c = ctx.cfg;
  const auto& mx = c.verify.matrix;
  const std::vector<double> ps = mx.p.empty() ? std::vector<double>{c.problem.p} : mx.p;
  const std::vector<int> ms = mx.m.empty() ? std::vector<int>{c.problem.m} : mx.m;
  const std::vector<ForcingConfig> fs_ = mx.forcing.empty() ? std::vector<ForcingConfig>{c.forcing} : mx.forcing;

  std::vector<ParabolicJob> jobs;
  for (double p : ps)
    for (int m : ms)
      for (const auto& f : fs_) {
        ParabolicJob job{{p, c.problem.mu}, c, ""};
        job.cfg.problem.p = p;
        job.cfg.problem.m = m;
        job.cfg.forcing = f;
        job.label = fmt::format("p={} m={} {}", num(p), m, forcing_label(f));
        jobs.push_back(std::move(job));
      }
  if (c.verify.t_scaling)
    for (double T : c.verify.t_values) {
      ParabolicJob job{{c.problem.p, c.problem.mu}, c, ""};
      job.cfg.problem.T = T;
      job.cfg.problem.steps = std::max(1, static_cast<int>(std::lround(T / c.problem.tau)));
      job.cfg.problem.tau = T / job.cfg.problem.steps;
      job.label = fmt::format("T-scaling T={}", num(T));
      jobs.push_back(std::move(job));
    }

  const VerifyOptions vo = verify_options(c);
  std::vector<ParabolicOutcome> outs(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), c.jobs,
               [&](int i) { outs[i] = run_parabolic_job(jobs[i], vo, c.verify.holder); });

  SweepReport rep;
  nlohmann::json runs = nlohmann::json::array();
  bool all_complete = true;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& o = outs[i];
    all_complete = all_complete && o.run.complete();
    runs.push_back({{"label", jobs[i].label},
                    {"complete", o.run.complete()},
                    {"failure", o.run.failure.value_or("")},
                    {"steps_done", o.run.ledger.entries.size()}});
    rep.records.insert(rep.records.end(), o.records.begin(), o.records.end());
  }
  sort_records(rep.records);
  auto j = sweep_json(rep);
  j["runs"] = runs;
  write_json(ctx, ctx.out / "estimates.json", j);
  write_text(ctx.out / "estimates.csv", records_csv(ctx, rep.records));
  ctx.say(fmt::format("{} runs, {} records, all pass {}, all complete {}", jobs.size(), rep.records.size(),
                      rep.all_pass(), all_complete));
  if (!all_complete) return kExitNonConvergence;
  return rep.all_pass() ? kExitOk : kExitMargin;
}

struct LadderRow {
  int m = 0;
  double h = 0.0;
  double tau = 0.0;
  int steps = 0;
  double error = 0.0;
  std::optional<double> order;
  std::optional<double> discrete_dev;
};

/// Heat ladder: p = 2, f = 0, sine-mode data. tau = T / ceil(T/h^2) (the
/// largest step not above h^2 that lands exactly on T) unless tau_rule = fixed.
inline std::vector<LadderRow> heat_ladder(const RunConfig& c) {
  const std::vector<SineMode> modes =
      c.initial.kind == "sine-modes" ? to_modes(c.initial.modes)
                                     : std::vector<SineMode>{SineMode{{1, 1, 1}, std::vector<double>(c.problem.N, 1.0)}};
  const NonlinearityParams prm{2.0, 0.0};
  std::vector<LadderRow> rows;
  for (int m : c.convergence.m_values) {
    const Grid g(c.problem.n, m);
    LadderRow row;
    row.m = m;
    row.h = g.h();
    if (c.convergence.tau_rule == "h2") {
      row.steps = static_cast<int>(std::ceil(c.problem.T / (row.h * row.h) - 1e-9));
      row.tau = c.problem.T / row.steps;
    } else {
      row.steps = c.problem.steps;
      row.tau = c.problem.tau;
    }
    ParabolicRunConfig pc;
    pc.tau = row.tau;
    pc.steps = row.steps;
    pc.step = c.solver.stationary;
    pc.step.tol = c.solver.step_tol;
    pc.stride = 1;
    const VectorField u0 = sample(g, sine_modes(g.n, modes));
    const VectorField zero(g, u0.components());
    const auto run = solve_parabolic(u0, [&](double) { return zero; }, pc, prm);
    if (!run.complete()) throw NonConvergence("heat ladder: " + *run.failure, {});
    const auto cont = heat_reference(modes, row.tau, row.steps, g, false);
    const auto disc = heat_reference(modes, row.tau, row.steps, g, true);
    const VectorField err = run.trajectory.snapshots.back() - cont.snapshots.back();
    row.error = std::sqrt(inner(err, err));
    double dev = 0.0;
    for (std::size_t k = 1; k < run.trajectory.snapshots.size(); ++k) {
      const VectorField d = run.trajectory.snapshots[k] - disc.snapshots[k];
      dev = std::max(dev, lebesgue_norm(d, kInf) / lebesgue_norm(disc.snapshots[k], kInf));
    }
    row.discrete_dev = dev;
    if (!rows.empty()) row.order = std::log(rows.back().error / row.error) / std::log(rows.back().h / row.h);
    rows.push_back(row);
  }
  return rows;
}

/// Manufactured stationary ladder: relative flux-form W^{1,p} error.
inline std::vector<LadderRow> manufactured_ladder(const RunConfig& c) {
  const NonlinearityParams prm{c.problem.p, c.problem.mu};
  std::vector<LadderRow> rows;
  for (int m : c.convergence.m_values) {
    const Grid g(c.problem.n, m);
    const auto u_star = manufactured_solution(c.forcing.solution, g.n);
    const VectorField f = manufactured_forcing(g, u_star, prm);
    const auto res = solve_stationary(f, prm, c.solver.stationary);
    const VectorField exact = sample(g, u_star);
    LadderRow row;
    row.m = m;
    row.h = g.h();
    row.error = flux_w1p_norm(res.u - exact, prm.p) / flux_w1p_norm(exact, prm.p);
    if (!rows.empty()) row.order = std::log(rows.back().error / row.error) / std::log(rows.back().h / row.h);
    rows.push_back(row);
  }
  return rows;
}

inline int cmd_convergence_study(const Context& ctx) {
  const auto& c = ctx.cfg;
  const bool heat = c.convergence.study == "heat";
  std::vector<LadderRow> rows;
  try {
    rows = heat ? heat_ladder(c) : manufactured_ladder(c);
  } catch (const NonConvergence& e) {
    ctx.say(e.what());
    return kExitNonConvergence;
  }
  std::string s = ctx.stamp();
  s += heat ? "m,h,tau,steps,error,order,discrete_max_rel_dev\n" : "m,h,error,order\n";
  bool ok = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string order = r.order ? num(*r.order) : "";
    if (heat)
      s += fmt::format("{},{},{},{},{},{},{}\n", r.m, num(r.h), num(r.tau), r.steps, num(r.error), order,
                       num(*r.discrete_dev));
    else
      s += fmt::format("{},{},{},{}\n", r.m, num(r.h), num(r.error), order);
    if (r.order) ok = ok && (heat ? *r.order >= c.verify.min_order : *r.order > 0.0);
  }
  write_text(ctx.out / "convergence.csv", s);
  nlohmann::json j = {{"study", c.convergence.study},
                      {"min_order", heat ? c.verify.min_order : 0.0},
                      {"final_order", rows.size() > 1 ? opt_num(rows.back().order) : nlohmann::json(nullptr)},
                      {"pass", ok}};
  write_json(ctx, ctx.out / "convergence.json", j);
  ctx.say(fmt::format("{} ladder over {} levels, pass {}", c.convergence.study, rows.size(), ok));
  return ok ? kExitOk : kExitMargin;
}

inline int cmd_mu_sweep(const Context& ctx) {
  const auto& c = ctx.cfg;
  const Grid g = make_grid(c.problem);
  const double p = c.problem.p;
  const VerifyOptions vo = verify_options(c);

  // mu-limit Cauchy table
  const VectorField f0 = stationary_forcing(c.forcing, g, c.problem.N, {p, 0.0});
  const auto table = mu_limit_study(f0, p, c.verify.mu0, c.verify.levels, c.solver.stationary);
  std::string s = ctx.stamp();
  s += "j,mu,iterations,residual,diff_next,diff_zero,note\n";
  bool all_solved = true;
  for (std::size_t j = 0; j < table.rows.size(); ++j) {
    const auto& r = table.rows[j];
    all_solved = all_solved && r.note.empty();
    s += fmt::format("{},{},{},{},{},{},{}\n", j, num(r.mu), r.iterations, num(r.residual),
                     r.diff_next ? num(*r.diff_next) : "", r.diff_zero ? num(*r.diff_zero) : "", csv_field(r.note));
  }
  write_text(ctx.out / "mu_limit.csv", s);
  const int levels = table.decreasing_levels();
  const bool cauchy_ok = levels >= c.verify.min_levels;

  // implied constants over mu: stationary and parabolic
  const auto& mus = c.verify.mu_values;
  std::vector<std::optional<EstimateRecord>> dnq(mus.size());
  std::vector<ParabolicOutcome> par(mus.size());
  std::vector<std::string> failures(mus.size());
  parallel_for(static_cast<int>(mus.size()), c.jobs, [&](int i) {
    const NonlinearityParams prm{p, mus[i]};
    VerifyOptions o = vo;
    o.label = fmt::format("mu={}", num(mus[i]));
    const VectorField f = stationary_forcing(c.forcing, g, c.problem.N, prm);
    try {
      const auto res = solve_stationary(f, prm, c.solver.stationary);
      dnq[i] = verify_dnq(res.u, f, prm, o);
    } catch (const NonConvergence& e) {
      failures[i] = e.what();
    }
    ParabolicJob job{prm, c, o.label};
    job.cfg.problem.mu = mus[i];
    par[i] = run_parabolic_job(job, vo, false);
  });

  SweepReport rep;
  bool all_complete = all_solved;
  for (std::size_t i = 0; i < mus.size(); ++i) {
    if (dnq[i]) rep.records.push_back(*dnq[i]);
    all_complete = all_complete && failures[i].empty() && par[i].run.complete();
    rep.records.insert(rep.records.end(), par[i].records.begin(), par[i].records.end());
  }
  sort_records(rep.records);
  if (g.n >= 3) {
    rep.uniformity.push_back(implied_c_uniformity(rep.records, "dnq", c.verify.uniformity_max));
    rep.uniformity.push_back(implied_c_uniformity(rep.records, "funds3", c.verify.uniformity_max));
  }
  auto j = sweep_json(rep);
  j["mu_limit"] = {{"decreasing_levels", levels}, {"min_levels", c.verify.min_levels}, {"pass", cauchy_ok}};
  write_json(ctx, ctx.out / "mu_sweep.json", j);
  write_text(ctx.out / "mu_sweep.csv", records_csv(ctx, rep.records));
  ctx.say(fmt::format("Cauchy levels {}  uniformity/records pass {}", levels, rep.all_pass()));
  if (!all_complete) return kExitNonConvergence;
  return cauchy_ok && rep.all_pass() ? kExitOk : kExitMargin;
}

}  // namespace app

/// Default output directory: $PLAP_OUTPUT_ROOT/<subcommand>, else ./plap-out/<subcommand>.
inline std::filesystem::path default_output_dir(const std::string& sub) {
  const char* root = std::getenv("PLAP_OUTPUT_ROOT");
  return std::filesystem::path(root && *root ? root : "plap-out") / sub;
}

/// Runs one subcommand; returns the exit-code contract value. `out_dir` empty
/// means config output.dir, then the default. Module precondition violations
/// surface as config errors.
inline int run_subcommand(const std::string& name, const RunConfig& cfg, const std::string& out_dir = "",
                          std::ostream* log = nullptr, const std::string& run_dir = "") {
  app::Context ctx;
  ctx.cfg = cfg;
  ctx.hash = config_hash(cfg);
  ctx.log = log;
  ctx.out = !out_dir.empty() ? std::filesystem::path(out_dir)
            : !cfg.output.dir.empty() ? std::filesystem::path(cfg.output.dir)
                                      : default_output_dir(name);
  if (!run_dir.empty()) ctx.run_dir = run_dir;
  try {
    std::filesystem::create_directories(ctx.out);
    app::write_json(ctx, ctx.out / "config.json", to_json(cfg));
    if (name == "check-exponents") return app::cmd_check_exponents(ctx);
    if (name == "solve-stationary") return app::cmd_solve_stationary(ctx);
    if (name == "solve-parabolic") return app::cmd_solve_parabolic(ctx);
    if (name == "verify-estimates") return app::cmd_verify_estimates(ctx);
    if (name == "convergence-study") return app::cmd_convergence_study(ctx);
    if (name == "mu-sweep") return app::cmd_mu_sweep(ctx);
    throw ConfigError("unknown subcommand '" + name + "'");
  } catch (const ConfigError& e) {
    ctx.say(std::string("config error: ") + e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    ctx.say(std::string("config error: ") + e.what());
    return kExitConfig;
  } catch (const std::domain_error& e) {
    ctx.say(std::string("config error: ") + e.what());
    return kExitConfig;
  } catch (const NonConvergence& e) {
    ctx.say(e.what());
    return kExitNonConvergence;
  }
}

}  // namespace plap
