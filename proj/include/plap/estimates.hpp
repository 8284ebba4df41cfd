#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "plap/exponents.hpp"
#include "plap/grid.hpp"
#include "plap/nonlinearity.hpp"
#include "plap/norms.hpp"
#include "plap/parabolic.hpp"
#include "plap/stationary.hpp"

namespace plap {

struct EstimateMeta {
  double p = 0.0;
  double mu = 0.0;
  int n = 3;
  int m = 0;
  double h = 0.0;
  double tau = 0.0;  // 0 for stationary records
  double T = 0.0;
  std::uint64_t seed = 0;
  std::string label;
};

/// One audited inequality. Explicit-constant estimates carry margin and pass;
/// estimates with an unspecified constant carry implied_c = LHS / basis.
struct EstimateRecord {
  std::string id;
  std::string convention;  // "mu^2" or "mu^p" for the general-mu family, else empty
  double lhs = 0.0;
  double rhs = 0.0;
  std::optional<double> margin;
  std::optional<double> implied_c;
  std::optional<bool> pass;
  std::string note;
  EstimateMeta meta;
};

struct Uniformity {
  std::string id;
  double max_c = 0.0;
  double min_c = 0.0;
  double ratio = 0.0;
  int count = 0;
  bool pass = false;
};

struct SweepReport {
  std::vector<EstimateRecord> records;
  std::vector<Uniformity> uniformity;

  bool all_pass() const {
    for (const auto& r : records)
      if (r.pass && !*r.pass) return false;
    for (const auto& u : uniformity)
      if (!u.pass) return false;
    return true;
  }
};

struct VerifyOptions {
  double slack = 1.05;          // RHS allowance for explicit-constant estimates
  double energy_rel_tol = 1e-6; // per-step ledger margins, relative
  std::uint64_t seed = 0;
  std::string label;
};

/// Deterministic merge order: (id, convention, p, mu, m, tau, label).
inline void sort_records(std::vector<EstimateRecord>& recs) {
  std::stable_sort(recs.begin(), recs.end(), [](const EstimateRecord& a, const EstimateRecord& b) {
    return std::tie(a.id, a.convention, a.meta.p, a.meta.mu, a.meta.m, a.meta.tau, a.meta.label) <
           std::tie(b.id, b.convention, b.meta.p, b.meta.mu, b.meta.m, b.meta.tau, b.meta.label);
  });
}

namespace detail {

struct RunTotals {
  double grad0 = 0.0;     // ||D u0||_p^p
  double grad_max = 0.0;  // max_k ||D u^k||_p^p, k >= 1
  double forcing = 0.0;   // ||f||^2_{L2 L2}
  double dissipation = 0.0;
  double dt = 0.0;
  double T = 0.0;
};

inline RunTotals totals(const Trajectory& traj, const EnergyLedger& ledger) {
  if (ledger.entries.empty()) throw std::invalid_argument("verify: ledger has no steps");
  if (traj.snapshots.size() < 2) throw std::invalid_argument("verify: trajectory has no steps");
  if (traj.tau != ledger.tau) throw std::invalid_argument("verify: trajectory and ledger disagree on tau");
  if (traj.steps.back() != static_cast<int>(ledger.entries.size()))
    throw std::invalid_argument("verify: trajectory ends at step " + std::to_string(traj.steps.back()) +
                                " but the ledger has " + std::to_string(ledger.entries.size()) + " steps");
  RunTotals t;
  t.grad0 = ledger.grad_pow0;
  std::vector<double> F, D, dt;
  for (const auto& e : ledger.entries) {
    t.grad_max = std::max(t.grad_max, e.grad_pow);
    F.push_back(e.F);
    D.push_back(e.D);
    dt.push_back(e.dtnorm);
  }
  t.forcing = ledger.tau * pairwise_sum(F);
  t.dissipation = ledger.tau * pairwise_sum(D);
  t.dt = ledger.tau * pairwise_sum(dt);
  t.T = ledger.tau * static_cast<double>(ledger.entries.size());
  return t;
}

inline EstimateMeta meta_of(const Grid& g, const NonlinearityParams& prm, double tau, double T,
                            const VerifyOptions& opt) {
  return {prm.p, prm.mu, g.n, g.m, g.h(), tau, T, opt.seed, opt.label};
}

inline EstimateRecord explicit_record(std::string id, std::string conv, double lhs, double rhs, double slack,
                                      EstimateMeta meta) {
  EstimateRecord r;
  r.id = std::move(id);
  r.convention = std::move(conv);
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = rhs - lhs;
  r.pass = lhs <= slack * rhs;
  r.meta = std::move(meta);
  return r;
}

inline EstimateRecord implied_record(std::string id, std::string conv, double lhs, double basis,
                                     EstimateMeta meta) {
  EstimateRecord r;
  r.id = std::move(id);
  r.convention = std::move(conv);
  r.lhs = lhs;
  r.rhs = basis;
  if (basis > 0.0) {
    r.implied_c = lhs / basis;
  } else if (lhs == 0.0) {
    r.implied_c = 0.0;
  } else {
    r.pass = false;
    r.note = "zero data with nonzero solution";
  }
  r.meta = std::move(meta);
  return r;
}

inline double bochner_w2(const Trajectory& traj, double p, double q_hat) {
  return bochner_norm(traj, 2.0 * (p - 1.0), {SpatialNorm::Kind::W2q, q_hat});
}

inline bool has_core_exponent(int n) { return n >= 3; }

}  // namespace detail

/// Discrete ledger forms of the energy inequality and its time-integrated form.
inline std::vector<EstimateRecord> verify_energy_ledger(const Trajectory& traj, const EnergyLedger& ledger,
                                                        const NonlinearityParams& prm,
                                                        const VerifyOptions& opt = {}) {
  const auto t = detail::totals(traj, ledger);
  const Grid& g = traj.snapshots.front().grid();
  const auto meta = detail::meta_of(g, prm, ledger.tau, t.T, opt);
  const auto chk = check_energy_inequality(ledger);

  EstimateRecord step;
  step.id = "interm3-discrete";
  step.lhs = 0.0;
  for (const auto& e : ledger.entries)
    step.lhs = std::max(step.lhs, (e.E - e.E_before + ledger.tau * e.D) - ledger.tau * e.F);
  step.rhs = 0.0;
  step.margin = chk.worst_relative;
  step.pass = chk.worst_relative >= -opt.energy_rel_tol;
  step.note = "lhs: worst per-step excess; margin: worst per-step margin relative to |E0| + tau sum F";
  step.meta = meta;

  const double EM = ledger.entries.back().E;
  EstimateRecord total = detail::explicit_record("itempo-discrete", "", EM + t.dissipation,
                                                 ledger.E0 + t.forcing, 1.0, meta);
  total.pass = *total.margin >= -opt.energy_rel_tol * chk.reference;
  return {step, total};
}

/// Explicit-constant estimates for mu = 0 plus the W^{2,q_hat} Bochner
/// estimate, whose constant is unspecified (implied-C with C = 1 basis).
inline std::vector<EstimateRecord> verify_theorem12(const Trajectory& traj, const EnergyLedger& ledger,
                                                    const NonlinearityParams& prm, const VerifyOptions& opt = {}) {
  prm.validate();
  const auto t = detail::totals(traj, ledger);
  const Grid& g = traj.snapshots.front().grid();
  const auto meta = detail::meta_of(g, prm, ledger.tau, t.T, opt);
  const double p = prm.p;
  std::vector<EstimateRecord> out;

  if (prm.mu == 0.0) {
    const double rhs = (2.0 / p) * t.grad0 + t.forcing;
    out.push_back(detail::explicit_record("primas2", "", (2.0 / p) * t.grad_max, rhs, opt.slack, meta));
    out.push_back(detail::explicit_record("segas2", "", t.dissipation, rhs, opt.slack, meta));
    auto ter = detail::explicit_record("tercas2", "", t.dt, (2.0 / p) * t.grad0 + 2.0 * t.forcing, opt.slack, meta);
    const double sharp = (2.0 / p) * t.grad0 + t.forcing;
    ter.note = t.dt <= sharp ? "also within the sharper bound without the factor 2"
                             : "exceeds the sharper bound without the factor 2";
    out.push_back(std::move(ter));
  }

  if (detail::has_core_exponent(g.n)) {
    const double q = hat_q(p, g.n);
    const double lhs = std::pow(detail::bochner_w2(traj, p, q), 2.0);
    const double basis = std::pow(t.T, (2.0 - p) / (p - 1.0)) * (t.grad0 + t.forcing) +
                         std::pow(t.grad0, 1.0 / (p - 1.0)) + std::pow(t.forcing, 1.0 / (p - 1.0));
    out.push_back(detail::implied_record("funds3", "", lhs, basis, meta));
  }
  return out;
}

/// General-mu family under both lower-bound conventions (C1 mu^2 and C1 mu^p).
/// |Omega| is the cell measure of the grid.
inline std::vector<EstimateRecord> verify_prop31(const Trajectory& traj, const EnergyLedger& ledger,
                                                 const NonlinearityParams& prm, const VerifyOptions& opt = {}) {
  prm.validate();
  const auto t = detail::totals(traj, ledger);
  const Grid& g = traj.snapshots.front().grid();
  const auto meta = detail::meta_of(g, prm, ledger.tau, t.T, opt);
  const auto k = structural_constants(prm);
  const double p = prm.p;
  const double omega = g.cell_measure();
  const double e = 1.0 / (2.0 * (p - 1.0));
  std::optional<double> w2;
  if (detail::has_core_exponent(g.n)) w2 = detail::bochner_w2(traj, p, hat_q(p, g.n));

  std::vector<EstimateRecord> out;
  for (const auto& [conv, c1] : {std::pair<std::string, double>{"mu^2", k.c1}, {"mu^p", k.c1_mu_p}}) {
    const double extra = (c1 + k.c1_tilde) * omega;
    const double rhs = k.c0_tilde * t.grad0 + t.forcing + extra;
    out.push_back(detail::explicit_record("prop31-primas", conv, k.c0 * t.grad_max, rhs, opt.slack, meta));
    out.push_back(detail::explicit_record("prop31-segasg", conv, t.dissipation, rhs, opt.slack, meta));
    out.push_back(detail::explicit_record("prop31-tercasg", conv, t.dt,
                                          k.c0_tilde * t.grad0 + 2.0 * t.forcing + extra, opt.slack, meta));
    if (w2) {
      const double basis = std::pow(t.T, e) + std::pow(k.c0_tilde, e) * std::pow(t.grad0, e) +
                           std::pow(t.forcing, 2.0 * e) + std::pow(extra, e);
      out.push_back(detail::implied_record("prop31-funds2", conv, *w2, basis, meta));
    }
  }
  return out;
}

/// Everything applicable to one parabolic run: mu = 0 goes through the exact
/// forms, mu > 0 through the general-mu family; the ledger forms always apply.
inline std::vector<EstimateRecord> verify_run(const Trajectory& traj, const EnergyLedger& ledger,
                                              const NonlinearityParams& prm, const VerifyOptions& opt = {}) {
  auto out = verify_energy_ledger(traj, ledger, prm, opt);
  auto a = verify_theorem12(traj, ledger, prm, opt);
  out.insert(out.end(), a.begin(), a.end());
  if (prm.mu > 0.0) {
    auto b = verify_prop31(traj, ledger, prm, opt);
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

/// Stationary W^{2,q_hat} estimate: implied C = ||u||_{2,q_hat} / (||f||_{q_hat} + ||f||_2^{1/(p-1)}).
inline EstimateRecord verify_dnq(const VectorField& u, const VectorField& f, const NonlinearityParams& prm,
                                 const VerifyOptions& opt = {}) {
  prm.validate();
  u.require_same(f);
  const Grid& g = u.grid();
  const double q = hat_q(prm.p, g.n);
  const double lhs = sobolev_norms(u, q).w2q;
  const double basis = lebesgue_norm(f, q) + std::pow(lebesgue_norm(f, 2.0), 1.0 / (prm.p - 1.0));
  return detail::implied_record("dnq", "", lhs, basis, detail::meta_of(g, prm, 0.0, 0.0, opt));
}

/// max/min implied C over the records with the given id (and convention).
inline Uniformity implied_c_uniformity(const std::vector<EstimateRecord>& recs, const std::string& id,
                                       double max_ratio = 10.0, const std::string& convention = "") {
  Uniformity u;
  u.id = id;
  for (const auto& r : recs) {
    if (r.id != id || r.convention != convention || !r.implied_c) continue;
    const double c = *r.implied_c;
    u.max_c = u.count == 0 ? c : std::max(u.max_c, c);
    u.min_c = u.count == 0 ? c : std::min(u.min_c, c);
    ++u.count;
  }
  u.ratio = u.count > 0 && u.min_c > 0.0 ? u.max_c / u.min_c : kInf;
  u.pass = u.count >= 2 && u.ratio <= max_ratio;
  return u;
}

/// Report-only: time-L^{2(p-1)} aggregate of the Hölder seminorm against the
/// W^{2,q_hat} Bochner norm (n = 3, p > 3/2).
inline std::optional<EstimateRecord> holder_sanity(const Trajectory& traj, const NonlinearityParams& prm,
                                                   const VerifyOptions& opt = {}) {
  const Grid& g = traj.snapshots.front().grid();
  if (g.n != 3 || !(prm.p > 1.5)) return std::nullopt;
  const double alpha = holder_alpha(prm.p);
  const double r = 2.0 * (prm.p - 1.0);
  std::vector<double> terms;
  for (std::size_t j = 1; j < traj.snapshots.size(); ++j)
    terms.push_back((traj.times[j] - traj.times[j - 1]) *
                    std::pow(holder_seminorm(traj.snapshots[j], alpha, opt.seed), r));
  const double lhs = std::pow(pairwise_sum(terms), 1.0 / r);
  auto rec = detail::implied_record("holder-embedding", "", lhs, detail::bochner_w2(traj, prm.p, hat_q(prm.p, 3)),
                                    detail::meta_of(g, prm, traj.tau, traj.final_time(), opt));
  rec.note = "report only";
  return rec;
}

struct MuLimitRow {
  double mu = 0.0;
  int iterations = 0;
  double residual = 0.0;
  std::optional<double> diff_next;  // ||u_mu_j - u_mu_{j+1}||_{W^{1,p}}
  std::optional<double> diff_zero;  // ||u_mu_j - u_0||_{W^{1,p}}
  std::string note;
};

struct MuLimitTable {
  double p = 0.0;
  std::vector<MuLimitRow> rows;  // mu_0 > mu_1 > ... > mu_{L-1} > 0, then mu = 0

  /// Length of the leading run of strictly decreasing successive differences.
  int decreasing_levels() const {
    int count = 0;
    double prev = kInf;
    for (const auto& r : rows) {
      if (!r.diff_next || !(*r.diff_next < prev)) break;
      prev = *r.diff_next;
      ++count;
    }
    return count;
  }
};

/// Stationary solves along mu_j = 2^{-j} mu0 (j < levels) and mu = 0; each
/// solve is warm-started from the previous one. Differences use the
/// flux-form W^{1,p} norm.
inline MuLimitTable mu_limit_study(const VectorField& f, double p, double mu0, int levels,
                                   const StationarySolveConfig& cfg) {
  if (!(mu0 > 0.0)) throw std::invalid_argument("mu_limit_study: mu0 must be positive");
  if (levels < 1) throw std::invalid_argument("mu_limit_study: levels must be >= 1");
  std::vector<double> mus;
  for (int j = 0; j < levels; ++j) mus.push_back(std::ldexp(mu0, -j));
  mus.push_back(0.0);

  auto w1p = [p](const VectorField& a, const VectorField& b) { return flux_w1p_norm(a - b, p); };

  MuLimitTable table;
  table.p = p;
  std::vector<std::optional<VectorField>> sols;
  std::optional<VectorField> warm;
  for (double mu : mus) {
    MuLimitRow row;
    row.mu = mu;
    try {
      auto res = solve_stationary(f, NonlinearityParams{p, mu}, cfg, warm);
      row.iterations = res.iterations;
      row.residual = res.residual;
      warm = res.u;
      sols.push_back(std::move(res.u));
    } catch (const NonConvergence& e) {
      row.iterations = e.best().iterations;
      row.residual = e.best().residual;
      row.note = e.what();
      sols.push_back(std::nullopt);
    }
    table.rows.push_back(std::move(row));
  }
  const auto& zero = sols.back();
  for (std::size_t j = 0; j < sols.size(); ++j) {
    if (!sols[j]) continue;
    if (j + 1 < sols.size() && sols[j + 1]) table.rows[j].diff_next = w1p(*sols[j], *sols[j + 1]);
    if (zero) table.rows[j].diff_zero = w1p(*sols[j], *zero);
  }
  return table;
}

}  // namespace plap
