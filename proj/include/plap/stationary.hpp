#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "plap/grid.hpp"
#include "plap/nonlinearity.hpp"
#include "plap/operators.hpp"

namespace plap {

struct StationarySolveConfig {
  double tol = 1e-8;                  // normalized residual target
  int max_outer = 400;                // Kačanov iterations over all stages
  std::vector<double> eps_schedule{1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10};
  double inner_tol = 1e-14;           // CG: ||r|| <= inner_tol ||b|| always stops
  double inner_reduction = 1e-2;      // CG: or ||r|| <= inner_reduction ||r_0||
  int inner_max = 20000;

  void validate() const {
    if (!(tol > 0.0)) throw std::invalid_argument("solver tol must be positive");
    if (max_outer < 1) throw std::invalid_argument("solver max_outer must be >= 1");
    if (eps_schedule.empty()) throw std::invalid_argument("eps_schedule must not be empty");
    for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
      if (!(eps_schedule[i] > 0.0)) throw std::invalid_argument("eps_schedule entries must be positive");
      if (i > 0 && !(eps_schedule[i] < eps_schedule[i - 1]))
        throw std::invalid_argument("eps_schedule must be strictly decreasing");
    }
    if (!(inner_tol > 0.0) || !(inner_reduction > 0.0 && inner_reduction < 1.0))
      throw std::invalid_argument("inner tolerances must be positive (reduction < 1)");
    if (inner_max < 1) throw std::invalid_argument("inner_max must be >= 1");
  }
};

struct StationaryResult {
  VectorField u;
  double residual = 0.0;
  int iterations = 0;
  double energy = 0.0;  // (1/2) int G(|Du|^2) - <f, u>
  int linear_iterations = 0;
  bool descent_ok = true;
  std::vector<double> residual_history;
  std::vector<double> functional_history;
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, StationaryResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const StationaryResult& best() const { return best_; }

 private:
  StationaryResult best_;
};

namespace detail {

struct MinimizeOutcome {
  bool converged = false;
  int iterations = 0;
  int linear_iterations = 0;
  double residual = 0.0;
  bool descent_ok = true;
  std::vector<double> residual_history;
  std::vector<double> functional_history;
};

/// Minimizes  (1/2) h^n sum_c G(Y_c(v)) + (sigma/2) ||v||^2 - <b, v>
/// over zero-boundary fields by lagged-diffusivity (Kačanov) iteration.
/// Each outer step freezes a_c = A(max(Y_c, eps^2)) and minimizes the
/// resulting quadratic with Jacobi-preconditioned CG. Because G is concave in
/// Y for p <= 2, the quadratic majorizes the eps-regularized functional and
/// touches it at the current iterate, so every CG iterate (CG decreases the
/// quadratic monotonically) lowers the functional.
template <FluxLaw Law>
class KacanovMinimizer {
 public:
  KacanovMinimizer(const FluxForm& ff, const Law& law, int N, std::vector<double> rhs, double sigma)
      : ff_(ff), law_(law), N_(N), b_(std::move(rhs)), sigma_(sigma),
        Y_(ff.cells()), coef_(ff.cells()), work_(b_.size()) {
    norm_b_ = std::sqrt(dot(b_, b_));
    scale_ = std::max(norm_b_ * std::sqrt(ff_.grid().volume()), 1.0);
  }

  /// ||sigma v + L_{B(v)} v - b||_h / max(||b||_h, 1), with the un-regularized
  /// stress (continuous extension at zero gradient).
  double residual(std::span<const double> v) {
    ff_.cell_sq_gradient(v, N_, Y_);
    for (std::size_t c = 0; c < Y_.size(); ++c) coef_[c] = Y_[c] > 0.0 ? law_.coefficient_sq(Y_[c]) : 0.0;
    return residual_with(v);
  }

  double residual_floored(std::span<const double> v, double eps) {
    ff_.cell_sq_gradient(v, N_, Y_);
    for (std::size_t c = 0; c < Y_.size(); ++c) coef_[c] = law_.coefficient_sq(std::max(Y_[c], eps * eps));
    return residual_with(v);
  }

  /// Regularized functional; eps = 0 gives the true one.
  double functional(std::span<const double> v, double eps) {
    ff_.cell_sq_gradient(v, N_, Y_);
    const double e2 = eps * eps;
    const double g_floor = e2 > 0.0 ? law_.density(e2) : 0.0;
    const double a_floor = e2 > 0.0 ? law_.coefficient_sq(e2) : 0.0;
    std::vector<double> dens(Y_.size());
    for (std::size_t c = 0; c < Y_.size(); ++c)
      dens[c] = Y_[c] >= e2 ? law_.density(Y_[c]) : g_floor + a_floor * (Y_[c] - e2);
    double quad = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) quad += 0.5 * sigma_ * v[i] * v[i] - b_[i] * v[i];
    return ff_.grid().volume() * (0.5 * pairwise_sum(dens) + quad);
  }

  /// Runs the floor schedule. Past the configured schedule the floor keeps
  /// shrinking by 10x while it is still active on some cell: near extinction
  /// the exact minimizer has gradients far below any fixed floor.
  MinimizeOutcome run(std::vector<double>& u, const StationarySolveConfig& cfg) {
    MinimizeOutcome out;
    const auto& schedule = cfg.eps_schedule;
    std::size_t stage = 0;
    double eps = schedule.front();
    while (true) {
      double j_prev = functional(u, eps);
      while (true) {
        out.residual = residual(u);
        out.residual_history.push_back(out.residual);
        if (out.residual <= cfg.tol) {
          out.converged = true;
          return out;
        }
        const double floored = residual_floored(u, eps);
        const bool more_stages = stage + 1 < schedule.size() || (floor_active(eps) && eps > kMinFloor);
        if (more_stages && floored <= std::max(cfg.tol, eps)) break;
        if (out.iterations >= cfg.max_outer) return out;

        ff_.cell_sq_gradient(u, N_, Y_);
        for (std::size_t c = 0; c < Y_.size(); ++c) coef_[c] = law_.coefficient_sq(std::max(Y_[c], eps * eps));
        out.linear_iterations += conjugate_gradient(u, cfg);
        ++out.iterations;

        const double j = functional(u, eps);
        out.functional_history.push_back(j);
        if (j > j_prev + 1e-12 * std::max(1.0, std::abs(j_prev))) out.descent_ok = false;
        j_prev = j;
      }
      ++stage;
      eps = stage < schedule.size() ? schedule[stage] : 0.1 * eps;
    }
  }

 private:
  static constexpr double kMinFloor = 1e-150;

  /// Whether the floor eps changes the coefficient on some cell (uses Y_ of the last evaluation).
  bool floor_active(double eps) const {
    const double e2 = eps * eps;
    for (double y : Y_)
      if (y < e2) return true;
    return false;
  }

  static double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  }

  double residual_with(std::span<const double> v) {
    ff_.apply(coef_, v, N_, work_);
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double r = sigma_ * v[i] + work_[i] - b_[i];
      s += r * r;
    }
    // Boundary entries of v, b and work are zero, so the sum is over interior nodes.
    return std::sqrt(s * ff_.grid().volume()) / scale_;
  }

  /// Solves (sigma I + L_coef) x = b starting from x; returns CG iterations.
  int conjugate_gradient(std::vector<double>& x, const StationarySolveConfig& cfg) {
    const std::size_t size = x.size();
    const auto& L = ff_.layout();
    std::vector<double> node_diag(L.size);
    ff_.diagonal(coef_, node_diag);
    std::vector<double> inv_diag(size, 0.0);
    for (std::size_t p : L.interior)
      for (int k = 0; k < N_; ++k) inv_diag[p * N_ + k] = 1.0 / (sigma_ + node_diag[p]);

    std::vector<double> r(size), z(size), p(size), Ap(size);
    ff_.apply(coef_, x, N_, Ap);
    for (std::size_t i = 0; i < size; ++i) r[i] = b_[i] - sigma_ * x[i] - Ap[i];
    const double r0 = std::sqrt(dot(r, r));
    const double target = std::max(cfg.inner_tol * norm_b_, cfg.inner_reduction * r0);
    for (std::size_t i = 0; i < size; ++i) z[i] = r[i] * inv_diag[i];
    p = z;
    double rz = dot(r, z);
    int it = 0;
    double rnorm = r0;
    while (it < cfg.inner_max && rnorm > target) {
      ff_.apply(coef_, p, N_, Ap);
      for (std::size_t i = 0; i < size; ++i) Ap[i] += sigma_ * p[i];
      const double pAp = dot(p, Ap);
      if (!(pAp > 0.0)) break;
      const double alpha = rz / pAp;
      for (std::size_t i = 0; i < size; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * Ap[i];
      }
      for (std::size_t i = 0; i < size; ++i) z[i] = r[i] * inv_diag[i];
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < size; ++i) p[i] = z[i] + beta * p[i];
      rnorm = std::sqrt(dot(r, r));
      ++it;
    }
    return it;
  }

  const FluxForm& ff_;
  const Law& law_;
  int N_;
  std::vector<double> b_;
  double sigma_;
  double norm_b_ = 0.0;
  double scale_ = 1.0;
  std::vector<double> Y_, coef_, work_;
};

}  // namespace detail

/// Normalized residual ||div S(grad u) + f||_2 / max(||f||_2, 1).
template <FluxLaw Law>
double stationary_residual(const VectorField& u, const VectorField& f, const Law& law) {
  u.require_same(f);
  VectorField r = divergence_of_stress(u, law);
  r += f;
  return std::sqrt(inner(r, r)) / std::max(std::sqrt(inner(f, f)), 1.0);
}

inline double stationary_residual(const VectorField& u, const VectorField& f, const NonlinearityParams& prm) {
  return stationary_residual(u, f, PowerLaw(prm));
}

/// Solves -div S(grad u) = f with u = 0 on the boundary by minimizing the
/// discrete functional (1/2) int G(|Du|^2) - <f, u>.
template <FluxLaw Law>
StationaryResult solve_stationary(const VectorField& f, const Law& law, const StationarySolveConfig& cfg,
                                  const std::optional<VectorField>& initial = std::nullopt) {
  cfg.validate();
  const Grid& g = f.grid();
  const int N = f.components();
  FluxForm ff(g);
  auto b = ff.layout().pad(f);
  std::vector<double> u = initial ? (initial->require_same(f), ff.layout().pad(*initial))
                                  : std::vector<double>(b.size(), 0.0);
  detail::KacanovMinimizer<Law> km(ff, law, N, b, 0.0);
  auto out = km.run(u, cfg);

  StationaryResult res;
  res.u = VectorField(g, N);
  ff.layout().unpad(u, res.u);
  res.residual = out.residual;
  res.iterations = out.iterations;
  res.linear_iterations = out.linear_iterations;
  res.descent_ok = out.descent_ok;
  res.energy = km.functional(u, 0.0);
  res.residual_history = std::move(out.residual_history);
  res.functional_history = std::move(out.functional_history);
  if (!out.converged)
    throw NonConvergence("stationary solve did not reach residual " + std::to_string(cfg.tol) + " within " +
                             std::to_string(cfg.max_outer) + " outer iterations (residual " +
                             std::to_string(res.residual) + ")",
                         std::move(res));
  return res;
}

inline StationaryResult solve_stationary(const VectorField& f, const NonlinearityParams& prm,
                                         const StationarySolveConfig& cfg,
                                         const std::optional<VectorField>& initial = std::nullopt) {
  return solve_stationary(f, PowerLaw(prm), cfg, initial);
}

}  // namespace plap
