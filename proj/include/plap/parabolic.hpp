#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "plap/grid.hpp"
#include "plap/nonlinearity.hpp"
#include "plap/norms.hpp"
#include "plap/operators.hpp"
#include "plap/sources.hpp"
#include "plap/stationary.hpp"

namespace plap {

struct ParabolicRunConfig {
  double tau = 1e-3;
  int steps = 1;  // M, with T = M tau
  StationarySolveConfig step{.tol = 1e-10};
  int stride = 0;  // snapshot stride; 0 keeps every step when M <= 256, else ceil(M/256)

  double final_time() const { return tau * steps; }

  int effective_stride() const {
    if (stride > 0) return stride;
    return steps <= 256 ? 1 : (steps + 255) / 256;
  }

  void validate() const {
    if (!(tau > 0.0)) throw std::invalid_argument("time step tau must be positive");
    if (steps < 1) throw std::invalid_argument("number of steps M must be >= 1");
    if (stride < 0) throw std::invalid_argument("snapshot stride must be >= 0");
    step.validate();
  }
};

class StepFailure : public std::runtime_error {
 public:
  StepFailure(int step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

struct EnergyValues {
  double integral = 0.0;    // h^n sum_c G(Y_c)
  double functional = 0.0;  // half of it, the gradient-flow energy
};

template <FluxLaw Law>
EnergyValues energy(const VectorField& u, const Law& law) {
  const double e = energy_integral(u, law);
  return {e, 0.5 * e};
}

inline EnergyValues energy(const VectorField& u, const NonlinearityParams& prm) {
  return energy(u, PowerLaw(prm));
}

/// One row per step k -> k+1. E values use the integral normalization.
struct LedgerEntry {
  int k = 0;
  double t = 0.0;          // t_{k+1}
  double E_before = 0.0;   // int G(|D u^k|^2)
  double E = 0.0;          // int G(|D u^{k+1}|^2)
  double D = 0.0;          // ||div S(D u^{k+1})||_2^2
  double F = 0.0;          // ||f^k||_2^2
  double dtnorm = 0.0;     // ||(u^{k+1} - u^k)/tau||_2^2
  double margin = 0.0;     // tau F - (E - E_before + tau D)
  double grad_pow = 0.0;   // ||D u^{k+1}||_p^p (power laws only)
  double residual = 0.0;
  int iterations = 0;
};

struct EnergyLedger {
  double tau = 0.0;
  double E0 = 0.0;
  double grad_pow0 = 0.0;
  std::vector<LedgerEntry> entries;
};

namespace detail {
template <class Law>
double gradient_power(const VectorField& u, const Law& law) {
  if constexpr (requires { law.params.p; }) {
    return std::pow(flux_gradient_norm(u, law.params.p), law.params.p);
  } else {
    return 0.0;
  }
}

template <FluxLaw Law>
struct StepOutcome {
  VectorField u;
  double residual = 0.0;
  int iterations = 0;
};

template <FluxLaw Law>
StepOutcome<Law> step(const VectorField& u_k, const VectorField& f_k, double tau, const Law& law,
                      const StationarySolveConfig& cfg, int index) {
  u_k.require_same(f_k);
  const int N = u_k.components();
  FluxForm ff(u_k.grid());
  VectorField rhs = f_k;
  rhs += (1.0 / tau) * VectorField(u_k);
  auto u = ff.layout().pad(u_k);
  KacanovMinimizer<Law> km(ff, law, N, ff.layout().pad(rhs), 1.0 / tau);
  auto out = km.run(u, cfg);
  if (!out.converged)
    throw StepFailure(index, "implicit step did not converge (residual " + std::to_string(out.residual) + ")");
  StepOutcome<Law> res{VectorField(u_k.grid(), N), out.residual, out.iterations};
  ff.layout().unpad(u, res.u);
  return res;
}
}  // namespace detail

/// u^{k+1} = argmin_v (1/2) int G(|Dv|^2) + ||v - u^k||^2/(2 tau) - <f^k, v>,
/// whose Euler–Lagrange equation is (u^{k+1} - u^k)/tau = div S(Du^{k+1}) + f^k.
template <FluxLaw Law>
VectorField step_implicit(const VectorField& u_k, const VectorField& f_k, double tau, const Law& law,
                          const StationarySolveConfig& cfg) {
  cfg.validate();
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  return detail::step(u_k, f_k, tau, law, cfg, 0).u;
}

inline VectorField step_implicit(const VectorField& u_k, const VectorField& f_k, double tau,
                                 const NonlinearityParams& prm, const StationarySolveConfig& cfg) {
  return step_implicit(u_k, f_k, tau, PowerLaw(prm), cfg);
}

using SourceFn = std::function<VectorField(double)>;

struct ParabolicRun {
  Trajectory trajectory;
  EnergyLedger ledger;
  std::optional<std::string> failure;  // set when a step failed; data up to it is kept
  int failed_step = -1;

  bool complete() const { return !failure.has_value(); }
};

/// M implicit Euler steps with f^k = f(t_{k+1}). The ledger is dense in k,
/// snapshots are thinned by the configured stride (the final state is always kept).
template <FluxLaw Law>
ParabolicRun solve_parabolic(const VectorField& u0, const SourceFn& forcing, const ParabolicRunConfig& cfg,
                             const Law& law) {
  cfg.validate();
  ParabolicRun run;
  run.trajectory.tau = cfg.tau;
  run.ledger.tau = cfg.tau;
  const int stride = cfg.effective_stride();
  run.trajectory.push(0, 0.0, u0);
  run.ledger.E0 = energy_integral(u0, law);
  run.ledger.grad_pow0 = detail::gradient_power(u0, law);

  VectorField u = u0;
  double E_prev = run.ledger.E0;
  for (int k = 0; k < cfg.steps; ++k) {
    const double t_next = (k + 1) * cfg.tau;
    const VectorField f_k = forcing(t_next);
    detail::StepOutcome<Law> out;
    try {
      out = detail::step(u, f_k, cfg.tau, law, cfg.step, k);
    } catch (const StepFailure& e) {
      run.failure = e.what();
      run.failed_step = k;
      break;
    }
    LedgerEntry row;
    row.k = k;
    row.t = t_next;
    row.E_before = E_prev;
    row.E = energy_integral(out.u, law);
    const VectorField div = divergence_of_stress(out.u, law);
    row.D = inner(div, div);
    row.F = inner(f_k, f_k);
    VectorField dt = out.u - u;
    dt *= 1.0 / cfg.tau;
    row.dtnorm = inner(dt, dt);
    row.margin = cfg.tau * row.F - (row.E - row.E_before + cfg.tau * row.D);
    row.grad_pow = detail::gradient_power(out.u, law);
    row.residual = out.residual;
    row.iterations = out.iterations;
    run.ledger.entries.push_back(row);
    E_prev = row.E;
    u = std::move(out.u);
    if ((k + 1) % stride == 0 || k + 1 == cfg.steps) run.trajectory.push(k + 1, t_next, u);
  }
  return run;
}

inline ParabolicRun solve_parabolic(const VectorField& u0, const SourceFn& forcing, const ParabolicRunConfig& cfg,
                                    const NonlinearityParams& prm) {
  return solve_parabolic(u0, forcing, cfg, PowerLaw(prm));
}

inline SourceFn as_source(const Forcing& f) {
  return [f](double t) { return f.at(t); };
}

struct EnergyCheck {
  std::vector<double> margins;   // per step, absolute
  std::vector<double> relative;  // margins / reference
  double cumulative = 0.0;       // tau sum F - (E_M - E_0 + tau sum D)
  double reference = 0.0;        // |E_0| + tau sum F
  double worst_relative = 0.0;   // smallest relative margin (0 when there are no steps)

  bool ok(double rel_tol = 1e-6) const { return worst_relative >= -rel_tol && cumulative / reference >= -rel_tol; }
};

/// Per-step discrete form of  d/dt int G + ||div S||^2 <= ||f||^2  and its
/// time-summed form. Margins are normalized by the data scale |E_0| + tau sum F.
inline EnergyCheck check_energy_inequality(const EnergyLedger& ledger) {
  EnergyCheck chk;
  double sumF = 0.0, sumD = 0.0;
  for (const auto& e : ledger.entries) {
    sumF += e.F;
    sumD += e.D;
  }
  chk.reference = std::max(std::abs(ledger.E0) + ledger.tau * sumF, 1e-300);
  if (!ledger.entries.empty()) chk.worst_relative = kInf;
  for (const auto& e : ledger.entries) {
    const double m = ledger.tau * e.F - (e.E - e.E_before + ledger.tau * e.D);
    chk.margins.push_back(m);
    chk.relative.push_back(m / chk.reference);
    chk.worst_relative = std::min(chk.worst_relative, m / chk.reference);
  }
  const double EM = ledger.entries.empty() ? ledger.E0 : ledger.entries.back().E;
  chk.cumulative = ledger.tau * sumF - (EM - ledger.E0 + ledger.tau * sumD);
  return chk;
}

}  // namespace plap
