#include <gtest/gtest.h>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <numbers>

#include "plap/sources.hpp"
#include "plap/stationary.hpp"

using namespace plap;

namespace {

/// (sigma I - Delta_h) assembled independently of the solver's operator.
Eigen::SparseMatrix<double> shifted_laplacian(const Grid& g, double sigma) {
  const int n = g.n, m = g.m;
  const double h2 = g.h() * g.h();
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t i = 0; i < g.nodes(); ++i) {
    const auto idx = g.multi_index(i);
    trip.emplace_back(i, i, sigma + 2.0 * n / h2);
    for (int d = 0; d < n; ++d) {
      const std::size_t stride = ipow(static_cast<std::size_t>(m), n - 1 - d);
      if (idx[d] > 0) trip.emplace_back(i, i - stride, -1.0 / h2);
      if (idx[d] + 1 < m) trip.emplace_back(i, i + stride, -1.0 / h2);
    }
  }
  Eigen::SparseMatrix<double> A(g.nodes(), g.nodes());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

VectorField bumpy_source(const Grid& g) {
  return sample(g, {1, [](std::span<const double> x, std::span<double> o) {
                      o[0] = 10.0 * std::exp(-20.0 * ((x[0] - 0.3) * (x[0] - 0.3) + (x[1] - 0.6) * (x[1] - 0.6))) +
                             (x.size() > 2 ? x[2] : 0.0);
                    }});
}

}  // namespace

TEST(Stationary, HeatCaseMatchesDirectSolve) {
  Grid g(3, 11);
  const VectorField f = bumpy_source(g);
  StationarySolveConfig cfg;
  cfg.tol = 1e-13;
  const auto res = solve_stationary(f, NonlinearityParams{2.0, 0.0}, cfg);

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(shifted_laplacian(g, 0.0));
  Eigen::VectorXd b(g.nodes());
  for (std::size_t i = 0; i < g.nodes(); ++i) b[i] = f(i, 0);
  const Eigen::VectorXd x = ldlt.solve(b);
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < g.nodes(); ++i) {
    err = std::max(err, std::abs(res.u(i, 0) - x[i]));
    ref = std::max(ref, std::abs(x[i]));
  }
  EXPECT_LE(err, 1e-10 * ref);
}

TEST(Stationary, ZeroForcingGivesZero) {
  Grid g(3, 7);
  const auto res = solve_stationary(VectorField(g, 2), NonlinearityParams{1.5, 0.0}, {});
  for (double v : res.u.values()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(res.residual, 0.0);
}

TEST(Stationary, ConvergesAndDescends) {
  Grid g(3, 9);
  const VectorField f = bumpy_source(g);
  for (double p : {1.3, 1.6, 1.9}) {
    for (double mu : {0.0, 0.5}) {
      const NonlinearityParams prm{p, mu};
      const auto res = solve_stationary(f, prm, {});
      EXPECT_LE(res.residual, 1e-8) << p << " " << mu;
      EXPECT_TRUE(res.descent_ok);
      EXPECT_NEAR(stationary_residual(res.u, f, prm), res.residual, 1e-12);
      EXPECT_LT(res.energy, 0.0);  // the minimizer beats v = 0
    }
  }
}

TEST(Stationary, VectorValuedComponentsDecoupleAtPTwo) {
  Grid g(2, 15);
  VectorField f(g, 2);
  const VectorField s = bumpy_source(g);
  for (std::size_t i = 0; i < g.nodes(); ++i) f(i, 0) = s(i, 0), f(i, 1) = -2.0 * s(i, 0);
  StationarySolveConfig cfg;
  cfg.tol = 1e-12;
  const auto res = solve_stationary(f, NonlinearityParams{2.0, 0.0}, cfg);
  for (std::size_t i = 0; i < g.nodes(); ++i) EXPECT_NEAR(res.u(i, 1), -2.0 * res.u(i, 0), 1e-10);
}

TEST(Stationary, ManufacturedSolutionIsRecovered) {
  const NonlinearityParams prm{1.6, 0.0};
  const auto u_star = sine_modes(3, {SineMode{{1, 1, 1}, {1.0}}});
  double prev = 1.0;
  for (int m : {7, 15}) {
    Grid g(3, m);
    const auto res = solve_stationary(manufactured_forcing(g, u_star, prm), prm, {});
    const VectorField exact = sample(g, u_star);
    const double err = flux_w1p_norm(res.u - exact, prm.p) / flux_w1p_norm(exact, prm.p);
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 0.02);
}

TEST(Stationary, ReportsNonConvergenceWithBestIterate) {
  Grid g(3, 9);
  StationarySolveConfig cfg;
  cfg.max_outer = 1;
  cfg.tol = 1e-14;
  try {
    solve_stationary(bumpy_source(g), NonlinearityParams{1.4, 0.0}, cfg);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_EQ(e.best().iterations, 1);
    EXPECT_GT(e.best().residual, cfg.tol);
    EXPECT_EQ(e.best().u.nodes(), g.nodes());
  }
}

TEST(Stationary, WarmStartNeedsFewerIterations) {
  Grid g(3, 9);
  const VectorField f = bumpy_source(g);
  const NonlinearityParams prm{1.6, 0.0};
  const auto cold = solve_stationary(f, prm, {});
  const auto warm = solve_stationary(f, prm, {}, cold.u);
  EXPECT_LE(warm.iterations, cold.iterations);
  EXPECT_LE(warm.residual, 1e-8);
}

TEST(Stationary, ConfigValidation) {
  StationarySolveConfig cfg;
  cfg.eps_schedule = {1e-3, 1e-2};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.tol = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
