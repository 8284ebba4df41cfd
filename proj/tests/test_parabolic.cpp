#include <gtest/gtest.h>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>

#include "plap/parabolic.hpp"
#include "plap/sources.hpp"

using namespace plap;

namespace {

ParabolicRunConfig run_config(double tau, int steps, double tol = 1e-10) {
  ParabolicRunConfig c;
  c.tau = tau;
  c.steps = steps;
  c.step.tol = tol;
  return c;
}

SourceFn zero_source(const Grid& g, int N) {
  return [z = VectorField(g, N)](double) { return z; };
}

}  // namespace

TEST(Parabolic, HeatStepMatchesDirectSolve) {
  Grid g(3, 9);
  const double tau = 1e-3;
  const VectorField u0 = sample(g, poly_bump(3, {1.0}));
  VectorField f(g, 1);
  for (std::size_t i = 0; i < g.nodes(); ++i) f(i, 0) = std::sin(3.0 * i);
  StationarySolveConfig cfg;
  cfg.tol = 1e-14;
  const VectorField u1 = step_implicit(u0, f, tau, NonlinearityParams{2.0, 0.0}, cfg);

  const double h2 = g.h() * g.h();
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t i = 0; i < g.nodes(); ++i) {
    const auto idx = g.multi_index(i);
    trip.emplace_back(i, i, 1.0 / tau + 6.0 / h2);
    for (int d = 0; d < 3; ++d) {
      const std::size_t s = ipow(std::size_t(9), 2 - d);
      if (idx[d] > 0) trip.emplace_back(i, i - s, -1.0 / h2);
      if (idx[d] < 8) trip.emplace_back(i, i + s, -1.0 / h2);
    }
  }
  Eigen::SparseMatrix<double> A(g.nodes(), g.nodes());
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd b(g.nodes());
  for (std::size_t i = 0; i < g.nodes(); ++i) b[i] = f(i, 0) + u0(i, 0) / tau;
  const Eigen::VectorXd x = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>(A).solve(b);
  for (std::size_t i = 0; i < g.nodes(); ++i) EXPECT_NEAR(u1(i, 0), x[i], 1e-10);
}

TEST(Parabolic, EigenmodeDecaysGeometrically) {
  Grid g(3, 11);
  const SineMode md{{1, 1, 2}, {1.0}};
  const double tau = 2e-3;
  const int M = 12;
  const auto run = solve_parabolic(sample(g, sine_modes(3, {md})), zero_source(g, 1), run_config(tau, M, 1e-13),
                                   NonlinearityParams{2.0, 0.0});
  ASSERT_TRUE(run.complete());
  const auto ref = heat_reference({md}, tau, M, g, true);
  for (int k = 1; k <= M; ++k) {
    const VectorField d = run.trajectory.snapshots[k] - ref.snapshots[k];
    EXPECT_LE(lebesgue_norm(d, kInf), 1e-10 * lebesgue_norm(ref.snapshots[k], kInf)) << k;
  }
}

TEST(Parabolic, EnergyDecaysWithoutForcing) {
  Grid g(3, 9);
  const VectorField u0 = sample(g, sine_modes(3, {SineMode{{1, 1, 1}, {1.0}}, SineMode{{2, 1, 3}, {0.3}}}));
  for (double p : {1.4, 1.7, 2.0}) {
    const auto run = solve_parabolic(u0, zero_source(g, 1), run_config(2e-3, 20), NonlinearityParams{p, 0.0});
    ASSERT_TRUE(run.complete()) << *run.failure;
    double prev = run.ledger.E0;
    for (const auto& e : run.ledger.entries) {
      EXPECT_LE(e.E, prev * (1.0 + 1e-12)) << p;
      prev = e.E;
    }
    EXPECT_TRUE(check_energy_inequality(run.ledger).ok());
  }
}

TEST(Parabolic, LedgerIsConsistent) {
  Grid g(3, 7);
  const NonlinearityParams prm{1.6, 0.1};
  const VectorField u0 = sample(g, poly_bump(3, {0.5}));
  Forcing f{sample(g, sine_modes(3, {SineMode{{1, 2, 1}, {3.0}}})), {}};
  auto cfg = run_config(5e-3, 8);
  const auto run = solve_parabolic(u0, as_source(f), cfg, prm);
  ASSERT_TRUE(run.complete());
  ASSERT_EQ(run.ledger.entries.size(), 8u);
  EXPECT_DOUBLE_EQ(run.ledger.E0, energy_integral(u0, prm));
  for (std::size_t k = 0; k < 8; ++k) {
    const auto& e = run.ledger.entries[k];
    EXPECT_EQ(e.k, static_cast<int>(k));
    EXPECT_DOUBLE_EQ(e.t, (k + 1) * cfg.tau);
    EXPECT_NEAR(e.F, inner(f.shape, f.shape), 1e-12 * e.F);
    EXPECT_EQ(e.E, energy_integral(run.trajectory.snapshots[k + 1], prm));
    if (k > 0) {
      EXPECT_EQ(e.E_before, run.ledger.entries[k - 1].E);
    }
    EXPECT_GE(e.margin, -1e-9 * (run.ledger.E0 + 8 * cfg.tau * e.F));
  }
  EXPECT_EQ(energy(u0, prm).functional, 0.5 * energy(u0, prm).integral);
}

TEST(Parabolic, SnapshotStride) {
  Grid g(2, 7);
  auto cfg = run_config(1e-3, 10);
  cfg.stride = 4;
  const auto run = solve_parabolic(sample(g, poly_bump(2, {1.0})), zero_source(g, 1), cfg, NonlinearityParams{1.8, 0.0});
  EXPECT_EQ(run.trajectory.steps, (std::vector<int>{0, 4, 8, 10}));
  EXPECT_EQ(run.ledger.entries.size(), 10u);
  EXPECT_EQ(run_config(1.0, 256).effective_stride(), 1);
  EXPECT_EQ(run_config(1.0, 1000).effective_stride(), 4);
}

TEST(Parabolic, ExtinctionIsResolved) {
  // p < 2, no forcing: the flow reaches zero in finite time; steps must keep converging.
  Grid g(3, 7);
  const auto run = solve_parabolic(sample(g, poly_bump(3, {0.2})), zero_source(g, 1), run_config(0.01, 30),
                                   NonlinearityParams{1.3, 0.0});
  ASSERT_TRUE(run.complete()) << *run.failure;
  EXPECT_LT(run.ledger.entries.back().E, 1e-8 * run.ledger.E0);
}

TEST(Parabolic, FailureKeepsPartialRun) {
  Grid g(3, 7);
  auto cfg = run_config(0.01, 5, 1e-14);
  cfg.step.max_outer = 1;
  const auto run = solve_parabolic(sample(g, poly_bump(3, {1.0})), zero_source(g, 1), cfg, NonlinearityParams{1.4, 0.0});
  EXPECT_FALSE(run.complete());
  EXPECT_EQ(run.failed_step, 0);
  EXPECT_EQ(run.trajectory.snapshots.size(), 1u);
}

TEST(Parabolic, EnergyCheckFlagsViolations) {
  EnergyLedger L;
  L.tau = 0.1;
  L.E0 = 1.0;
  L.entries.push_back({0, 0.1, 1.0, 1.5, 0.0, 0.0, 0.0, -0.5, 0.0, 0.0, 0});
  const auto chk = check_energy_inequality(L);
  EXPECT_NEAR(chk.worst_relative, -0.5, 1e-15);
  EXPECT_FALSE(chk.ok());
}
