#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "plap/field_io.hpp"
#include "plap/norms.hpp"
#include "plap/operators.hpp"
#include "plap/sources.hpp"

using namespace plap;

namespace {
VectorField random_field(const Grid& g, int N, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  VectorField u(g, N);
  for (auto& v : u.values()) v = d(rng);
  return u;
}
}  // namespace

TEST(Grid, Geometry) {
  Grid g(3, 15);
  EXPECT_DOUBLE_EQ(g.h(), 1.0 / 16.0);
  EXPECT_EQ(g.nodes(), 3375u);
  EXPECT_EQ(g.cells(), 4096u);
  EXPECT_DOUBLE_EQ(g.cell_measure(), 1.0);
  EXPECT_THROW(Grid(4, 15), std::invalid_argument);
  EXPECT_THROW(Grid(3, 2), std::invalid_argument);
  auto idx = g.multi_index(1);
  EXPECT_EQ(idx[2], 1);  // last axis fastest
  EXPECT_DOUBLE_EQ(g.coords(0)[0], g.h());
}

TEST(VectorField, ShapeChecksAndArithmetic) {
  Grid g(2, 5);
  VectorField a(g, 2), b(g, 2), c(g, 1);
  a(3, 1) = 2.0;
  b(3, 1) = 5.0;
  EXPECT_DOUBLE_EQ((a + b)(3, 1), 7.0);
  EXPECT_DOUBLE_EQ((b - a)(3, 1), 3.0);
  EXPECT_DOUBLE_EQ((2.0 * b)(3, 1), 10.0);
  EXPECT_THROW(a.require_same(c), std::invalid_argument);
  EXPECT_THROW(VectorField(g, 1, std::vector<double>(25, NAN)), std::invalid_argument);
}

TEST(Norms, ConstantsAndScaling) {
  Grid g(3, 7);
  VectorField u(g, 2);
  for (std::size_t i = 0; i < g.nodes(); ++i) u(i, 0) = 3.0, u(i, 1) = 4.0;
  EXPECT_NEAR(lebesgue_norm(u, kInf), 5.0, 1e-15);
  EXPECT_NEAR(lebesgue_norm(u, 2.0), 5.0 * std::sqrt(g.node_measure()), 1e-13);
  const VectorField w = random_field(g, 2, 1);
  for (double q : {1.2, 2.0, 3.5}) EXPECT_NEAR(lebesgue_norm(2.0 * w, q), 2.0 * lebesgue_norm(w, q), 1e-12);
}

TEST(Norms, SecondDerivativesOfQuadraticAreExact) {
  Grid g(3, 9);
  // u = x0 x1 (interior samples only; the zero padding spoils the stencil at the boundary)
  VectorField u = sample(g, {1, [](std::span<const double> x, std::span<double> o) { o[0] = x[0] * x[1]; }});
  const auto H = second_derivatives(u);
  const std::size_t i = g.nodes() / 2;  // centre node
  EXPECT_NEAR(H.values[i * 9 + 1], 1.0, 1e-12);
  EXPECT_NEAR(H.values[i * 9 + 3], 1.0, 1e-12);
  EXPECT_NEAR(H.values[i * 9 + 0], 0.0, 1e-12);
}

TEST(Norms, BochnerOfConstantTrajectory) {
  Grid g(2, 7);
  Trajectory tr;
  tr.tau = 0.1;
  const VectorField u = random_field(g, 1, 2);
  for (int k = 0; k <= 10; ++k) tr.push(k, 0.1 * k, u);
  const SpatialNorm L2{SpatialNorm::Kind::Lq, 2.0};
  EXPECT_NEAR(bochner_norm(tr, 2.0, L2), std::sqrt(1.0) * L2(u), 1e-13);
  EXPECT_NEAR(bochner_norm(tr, kInf, L2), L2(u), 1e-15);
  Trajectory lone;
  lone.push(0, 0.0, u);
  EXPECT_THROW(bochner_norm(lone, 2.0, L2), std::invalid_argument);
}

TEST(Norms, BochnerExcludesInitialSnapshot) {
  Grid g(1, 5);
  Trajectory tr;
  VectorField big(g, 1), small(g, 1);
  for (auto& v : big.values()) v = 100.0;
  tr.push(0, 0.0, big);
  tr.push(1, 0.5, small);
  EXPECT_EQ(bochner_norm(tr, 1.0, {SpatialNorm::Kind::Lq, 2.0}), 0.0);
}

TEST(Norms, HolderSeminormOfLinearRamp) {
  Grid g(1, 15);
  VectorField u = sample(g, {1, [](std::span<const double> x, std::span<double> o) { o[0] = x[0]; }});
  // Lipschitz constant 1 interior; the jump to the zero boundary at x = 1 gives 1 - h over h.
  const double s = holder_seminorm(u, 1.0);
  EXPECT_NEAR(s, (1.0 - g.h()) / g.h(), 1e-12);
  EXPECT_THROW(holder_seminorm(u, 1.5), std::invalid_argument);
}

TEST(FluxForm, UnitCoefficientIsSevenPointLaplacian) {
  Grid g(3, 7);
  const VectorField u = random_field(g, 1, 3);
  const VectorField lap = divergence_of_stress(u, NonlinearityParams{2.0, 0.0});
  const VectorField ref = laplacian_from(second_derivatives(u));
  for (std::size_t i = 0; i < g.nodes(); ++i) EXPECT_NEAR(lap(i, 0), ref(i, 0), 1e-9);
}

TEST(FluxForm, SummationByPartsIsExact) {
  for (int n : {1, 2, 3}) {
    Grid g(n, n == 3 ? 7 : 11);
    for (double p : {1.3, 1.6, 2.0}) {
      const NonlinearityParams prm{p, 0.0};
      const VectorField u = random_field(g, 2, 10 + n), w = random_field(g, 2, 20 + n);
      const double lhs = -inner(divergence_of_stress(u, prm), w);
      const double rhs = stress_pairing(u, w, PowerLaw(prm));
      EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(rhs)) << n << " " << p;
    }
  }
}

TEST(FluxForm, DivergenceIsEnergyGradient) {
  Grid g(3, 5);
  const NonlinearityParams prm{1.6, 0.1};
  const VectorField u = random_field(g, 1, 4), w = random_field(g, 1, 5);
  const double eps = 1e-6;
  const double dE = (energy_integral(u + eps * w, prm) - energy_integral(u - eps * w, prm)) / (4.0 * eps);
  EXPECT_NEAR(dE, -inner(divergence_of_stress(u, prm), w), 1e-6 * std::abs(dE));
}

TEST(FluxForm, ZeroFieldHasZeroStress) {
  Grid g(2, 5);
  const VectorField z(g, 1);
  const VectorField d = divergence_of_stress(z, NonlinearityParams{1.3, 0.0});
  for (double v : d.values()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(energy_integral(z, NonlinearityParams{1.3, 0.0}), 0.0);
}

TEST(FluxForm, GradientNormMatchesEnergyAtMuZero) {
  Grid g(3, 7);
  const VectorField u = random_field(g, 1, 6);
  const double p = 1.7;
  EXPECT_NEAR(energy_integral(u, NonlinearityParams{p, 0.0}), (2.0 / p) * std::pow(flux_gradient_norm(u, p), p),
              1e-11 * energy_integral(u, NonlinearityParams{p, 0.0}));
}

TEST(FieldIO, BitExactRoundTrip) {
  Grid g(3, 5);
  VectorField u = random_field(g, 3, 9);
  u(0, 0) = 1e-300;
  u(1, 1) = -0.0;
  std::stringstream ss;
  write_field(ss, u, {0, 0, 0, 0.125, 7, 0.875, "abc", "0.1.0"});
  const auto back = read_field(ss);
  EXPECT_EQ(back.header.m, 5);
  EXPECT_EQ(back.header.N, 3);
  EXPECT_EQ(back.header.step, 7);
  EXPECT_EQ(back.header.tau, 0.125);
  EXPECT_EQ(back.header.config_hash, "abc");
  ASSERT_EQ(back.field.values().size(), u.values().size());
  for (std::size_t i = 0; i < u.values().size(); ++i)
    EXPECT_EQ(std::bit_cast<std::uint64_t>(back.field.values()[i]), std::bit_cast<std::uint64_t>(u.values()[i]));
}

TEST(FieldIO, RejectsTruncatedPayload) {
  Grid g(2, 4);
  std::stringstream ss;
  write_field(ss, random_field(g, 1, 1), {});
  std::string s = ss.str();
  s.pop_back();
  std::stringstream cut(s);
  EXPECT_THROW(read_field(cut), std::runtime_error);
}

TEST(Sources, SineModeIsDiscreteEigenfunction) {
  Grid g(3, 9);
  const SineMode md{{1, 2, 1}, {1.0}};
  const VectorField u = sample(g, sine_modes(3, {md}));
  const VectorField lap = divergence_of_stress(u, NonlinearityParams{2.0, 0.0});
  const double lam = discrete_eigenvalue(md, g);
  for (std::size_t i = 0; i < g.nodes(); ++i) EXPECT_NEAR(lap(i, 0), -lam * u(i, 0), 1e-10 * lam);
}

TEST(Sources, GaussLegendreIntegratesPolynomials) {
  const auto [x, w] = gauss_legendre(16);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], 31);
  EXPECT_NEAR(s, 1.0 / 32.0, 1e-15);
}

TEST(Sources, RadialPowerIntegral) {
  // beta = 0 integrates 1; beta = 1, n = 1 integrates 1/x on [0,1]: divergent,
  // so use n = 2 where int_{[0,1]^2} |x|^{-1} = 2 asinh(1).
  EXPECT_NEAR(radial_power_unit_cube(0.0, 3), 1.0, 1e-12);
  EXPECT_NEAR(radial_power_unit_cube(1.0, 2), 2.0 * std::asinh(1.0), 1e-10);
}
