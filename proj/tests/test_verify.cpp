#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "plap/estimates.hpp"
#include "plap/sources.hpp"

using namespace plap;

namespace {

ParabolicRun short_run(const Grid&, const NonlinearityParams& prm, const VectorField& u0, const VectorField& f,
                       int steps = 8, double tau = 5e-3) {
  ParabolicRunConfig cfg;
  cfg.tau = tau;
  cfg.steps = steps;
  return solve_parabolic(u0, [f](double) { return f; }, cfg, prm);
}

const EstimateRecord& find(const std::vector<EstimateRecord>& recs, const std::string& id,
                           const std::string& conv = "") {
  for (const auto& r : recs)
    if (r.id == id && r.convention == conv) return r;
  throw std::runtime_error("missing record " + id);
}

}  // namespace

TEST(RoughForcing, L2StableHigherNormsBlowUp) {
  const RoughRadialSpec spec{{0.5, 0.5, 0.5}, 1.4, {1.0}};
  std::vector<double> l2, l4;
  for (int m : {15, 31, 63}) {
    Grid g(3, m);
    const VectorField f = rough_radial_shape(g, spec);
    l2.push_back(lebesgue_norm(f, 2.0));
    l4.push_back(std::pow(lebesgue_norm(f, 4.0), 4.0));
  }
  // ||f||_2 converges: successive changes shrink
  EXPECT_LT(std::abs(l2[2] - l2[1]), std::abs(l2[1] - l2[0]));
  // ||f||_4^4 grows like h^{-2.6}: doubling m multiplies it by about 2^2.6
  const double rate = std::log2(l4[2] / l4[1]);
  EXPECT_NEAR(rate, 2.6, 0.3);
}

TEST(RoughForcing, BoundedAndRejected) {
  Grid g(3, 7);
  const VectorField f = rough_radial_shape(g, {{0.5, 0.5, 0.5}, 0.0, {3.0, 4.0}});
  const std::size_t centre = (3 * 7 + 3) * 7 + 3;  // cell average by quadrature
  for (std::size_t i = 0; i < g.nodes(); ++i) EXPECT_NEAR(f.magnitude(i), 1.0, i == centre ? 1e-12 : 1e-15);
  EXPECT_THROW(rough_radial_shape(g, {{0.5, 0.5, 0.5}, 1.5, {1.0}}), std::invalid_argument);
  EXPECT_THROW(rough_radial_shape(g, {{0.5, 0.5, 0.5}, 1.0, {0.0}}), std::invalid_argument);
  const Forcing off{rough_radial_shape(g, {{0.5, 0.5, 0.5}, 1.0, {1.0}}), {TimeProfile::Kind::Constant, 0.0}};
  for (double v : off.at(0.3).values()) EXPECT_EQ(v, 0.0);
}

TEST(RoughForcing, SingularNodeGetsCellAverage) {
  Grid g(3, 7);  // x0 = 0.5 is the node (3,3,3)
  const double beta = 1.2;
  const VectorField f = rough_radial_shape(g, {{0.5, 0.5, 0.5}, beta, {1.0}});
  const std::size_t centre = (3 * 7 + 3) * 7 + 3;
  const double expected = std::pow(2.0 / g.h(), beta) * radial_power_unit_cube(beta, 3);
  EXPECT_NEAR(f(centre, 0), expected, 1e-12 * expected);
  EXPECT_GT(f(centre, 0), std::pow(g.h(), -beta));
}

TEST(TimeProfile, SpikeTrainKeepsL2Mass) {
  const TimeProfile tp{TimeProfile::Kind::SpikeTrain, 2.0, 0.1, 0.01};
  const int N = 100000;
  double mass = 0.0;
  for (int i = 0; i < N; ++i) {
    const double a = tp((i + 0.5) * 0.1 / N);
    mass += a * a * 0.1 / N;
  }
  EXPECT_NEAR(mass, 4.0 * 0.1, 1e-3);
}

TEST(Manufactured, HeatCaseIsEigenRelation) {
  Grid g(3, 31);
  const SineMode md{{1, 1, 1}, {1.0}};
  const VectorField f = manufactured_forcing(g, sine_modes(3, {md}), {2.0, 0.0});
  const VectorField u = sample(g, sine_modes(3, {md}));
  const double lam = 3.0 * std::numbers::pi * std::numbers::pi;
  for (std::size_t i = 0; i < g.nodes(); ++i) EXPECT_NEAR(f(i, 0), lam * u(i, 0), 1e-6 * lam);
}

TEST(Manufactured, ZeroAndRejection) {
  Grid g(3, 5);
  const VectorField f = manufactured_forcing(g, poly_bump(3, {0.0}), {1.6, 0.0});
  for (double v : f.values()) EXPECT_EQ(v, 0.0);
  const AnalyticField bad{1, [](std::span<const double> x, std::span<double> o) { o[0] = x[0]; }};
  EXPECT_THROW(manufactured_forcing(g, bad, {1.6, 0.0}), std::invalid_argument);
}

TEST(Manufactured, OracleAgreesWithSolverOperator) {
  // Second order where the stress is smooth (p = 2); for p < 2 the stress is
  // only Hölder continuous at critical points of u*, so only consistency.
  const auto u_star = sine_modes(3, {SineMode{{1, 1, 1}, {1.0}}});
  for (double p : {2.0, 1.6}) {
    const NonlinearityParams prm{p, 0.0};
    std::vector<double> diffs;
    for (int m : {7, 15}) {
      Grid g(3, m);
      const VectorField f = manufactured_forcing(g, u_star, prm);
      const VectorField d = f + divergence_of_stress(sample(g, u_star), prm);
      diffs.push_back(lebesgue_norm(d, 2.0) / lebesgue_norm(f, 2.0));
    }
    if (p == 2.0) {
      EXPECT_GT(std::log2(diffs[0] / diffs[1]), 1.8);
    } else {
      EXPECT_LT(diffs[1], diffs[0]);
    }
  }
}

TEST(HeatReference, InitialAndDecay) {
  Grid g(3, 7);
  const SineMode md{{1, 1, 1}, {2.0}};
  const auto tr = heat_reference({md}, 0.01, 3, g, false);
  const VectorField u0 = sample(g, sine_modes(3, {md}));
  for (std::size_t i = 0; i < g.nodes(); ++i) EXPECT_DOUBLE_EQ(tr.snapshots[0](i, 0), u0(i, 0));
  const double decay = std::exp(-3.0 * std::numbers::pi * std::numbers::pi * 0.03);
  const std::size_t c = g.nodes() / 2;
  EXPECT_NEAR(tr.snapshots[3](c, 0), decay * u0(c, 0), 1e-14);
}

TEST(GradientBounds, TrivialDataGivesZeroMargins) {
  Grid g(3, 7);
  const NonlinearityParams prm{1.6, 0.0};
  const auto run = short_run(g, prm, VectorField(g, 1), VectorField(g, 1), 4);
  const auto recs = verify_theorem12(run.trajectory, run.ledger, prm);
  for (const char* id : {"primas2", "segas2", "tercas2"}) {
    const auto& r = find(recs, id);
    EXPECT_EQ(r.lhs, 0.0);
    EXPECT_EQ(*r.margin, r.rhs);
    EXPECT_TRUE(*r.pass);
  }
  EXPECT_EQ(*find(recs, "funds3").implied_c, 0.0);
}

TEST(GradientBounds, HoldsOnSmoothAndRoughRuns) {
  Grid g(3, 9);
  const VectorField u0 = sample(g, sine_modes(3, {SineMode{{1, 1, 1}, {1.0}}}));
  for (double p : {1.5, 2.0}) {
    const NonlinearityParams prm{p, 0.0};
    for (const VectorField& f : {VectorField(g, 1), rough_radial_shape(g, {{0.5, 0.5, 0.5}, 1.4, {2.0}})}) {
      const auto run = short_run(g, prm, u0, f);
      ASSERT_TRUE(run.complete());
      const auto recs = verify_run(run.trajectory, run.ledger, prm);
      for (const auto& r : recs)
        if (r.pass) {
          EXPECT_TRUE(*r.pass) << r.id << " p=" << p;
        }
    }
  }
}

TEST(GradientBounds, FreeDecayGradientNormDecreases) {
  Grid g(3, 9);
  const NonlinearityParams prm{1.6, 0.0};
  const auto run = short_run(g, prm, sample(g, poly_bump(3, {1.0})), VectorField(g, 1));
  const auto recs = verify_theorem12(run.trajectory, run.ledger, prm);
  EXPECT_GE(*find(recs, "primas2").margin, 0.0);
  EXPECT_LE(run.ledger.entries.front().grad_pow, run.ledger.grad_pow0);
}

TEST(GradientBounds, MismatchedInputsRejected) {
  Grid g(3, 5);
  const NonlinearityParams prm{1.6, 0.0};
  const auto run = short_run(g, prm, sample(g, poly_bump(3, {1.0})), VectorField(g, 1), 4);
  EnergyLedger L = run.ledger;
  L.entries.pop_back();
  EXPECT_THROW(verify_theorem12(run.trajectory, L, prm), std::invalid_argument);
  L = run.ledger;
  L.tau *= 2.0;
  EXPECT_THROW(verify_theorem12(run.trajectory, L, prm), std::invalid_argument);
}

TEST(GeneralMuBounds, ConventionsCoincideAtMuOneAndZero) {
  Grid g(3, 7);
  const VectorField u0 = sample(g, poly_bump(3, {1.0}));
  for (double mu : {0.0, 1.0}) {
    const NonlinearityParams prm{1.6, mu};
    const auto run = short_run(g, prm, u0, VectorField(g, 1), 4);
    const auto recs = verify_prop31(run.trajectory, run.ledger, prm);
    for (const char* id : {"prop31-primas", "prop31-segasg", "prop31-tercasg"})
      EXPECT_DOUBLE_EQ(find(recs, id, "mu^2").rhs, find(recs, id, "mu^p").rhs) << id << " mu=" << mu;
  }
}

TEST(GeneralMuBounds, ConventionsDifferAtQuarterMu) {
  Grid g(3, 7);
  const NonlinearityParams prm{1.5, 0.25};
  const auto run = short_run(g, prm, sample(g, poly_bump(3, {1.0})), VectorField(g, 1), 4);
  const auto recs = verify_prop31(run.trajectory, run.ledger, prm);
  const auto k = structural_constants(prm);
  const double gap = find(recs, "prop31-primas", "mu^p").rhs - find(recs, "prop31-primas", "mu^2").rhs;
  EXPECT_NEAR(gap, (k.c1_mu_p - k.c1) * g.cell_measure(), 1e-12);
  EXPECT_GT(gap, 0.0);
  for (const auto& r : recs)
    if (r.pass) {
      EXPECT_TRUE(*r.pass) << r.id << " " << r.convention;
    }
}

TEST(Dnq, ImpliedConstantAndTrivialCase) {
  Grid g(3, 9);
  const NonlinearityParams prm{1.6, 0.0};
  const VectorField f = rough_radial_shape(g, {{0.5, 0.5, 0.5}, 1.4, {1.0}});
  const auto res = solve_stationary(f, prm, {});
  const auto r = verify_dnq(res.u, f, prm);
  ASSERT_TRUE(r.implied_c.has_value());
  EXPECT_GT(*r.implied_c, 0.0);
  EXPECT_FALSE(r.pass.has_value());
  const auto z = verify_dnq(VectorField(g, 1), VectorField(g, 1), prm);
  EXPECT_EQ(*z.implied_c, 0.0);
}

TEST(Uniformity, RatioAndPass) {
  std::vector<EstimateRecord> recs(3);
  for (int i = 0; i < 3; ++i) {
    recs[i].id = "dnq";
    recs[i].implied_c = 1.0 + i;
  }
  const auto u = implied_c_uniformity(recs, "dnq", 10.0);
  EXPECT_EQ(u.count, 3);
  EXPECT_DOUBLE_EQ(u.ratio, 3.0);
  EXPECT_TRUE(u.pass);
  EXPECT_FALSE(implied_c_uniformity(recs, "dnq", 2.0).pass);
  EXPECT_FALSE(implied_c_uniformity(recs, "funds3").pass);
}

TEST(MuLimit, HeatCaseIsMuIndependent) {
  Grid g(3, 7);
  StationarySolveConfig cfg;
  cfg.tol = 1e-12;
  const auto t = mu_limit_study(sample(g, poly_bump(3, {5.0})), 2.0, 1.0, 4, cfg);
  ASSERT_EQ(t.rows.size(), 5u);
  for (const auto& r : t.rows) {
    if (r.diff_next) {
      EXPECT_LE(*r.diff_next, 1e-10);
    }
    EXPECT_LE(*r.diff_zero, 1e-10);
  }
}

TEST(MuLimit, ZeroForcing) {
  Grid g(3, 5);
  const auto t = mu_limit_study(VectorField(g, 1), 1.6, 1.0, 3, {});
  for (const auto& r : t.rows) EXPECT_EQ(*r.diff_zero, 0.0);
}

TEST(MuLimit, DifferencesDecreaseForRoughForcing) {
  Grid g(3, 9);
  const VectorField f = 5.0 * rough_radial_shape(g, {{0.5, 0.5, 0.5}, 1.4, {1.0}});
  const auto t = mu_limit_study(f, 1.6, 1.0, 5, {});
  EXPECT_GE(t.decreasing_levels(), 4);
  EXPECT_EQ(t.rows.back().mu, 0.0);
}

TEST(Records, SortIsDeterministic) {
  std::vector<EstimateRecord> a(4);
  a[0].id = "segas2";
  a[1].id = "primas2";
  a[1].meta.p = 1.8;
  a[2].id = "primas2";
  a[2].meta.p = 1.4;
  a[3].id = "dnq";
  sort_records(a);
  EXPECT_EQ(a[0].id, "dnq");
  EXPECT_EQ(a[1].meta.p, 1.4);
  EXPECT_EQ(a[3].id, "segas2");
}
