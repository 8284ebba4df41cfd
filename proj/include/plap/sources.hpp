#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "plap/grid.hpp"
#include "plap/nonlinearity.hpp"
#include "plap/norms.hpp"

namespace plap {

/// One sine-product mode  coeff * prod_d sin(k_d pi x_d)  (coeff is an N-vector).
struct SineMode {
  std::array<int, 3> k{1, 1, 1};
  std::vector<double> coeff{1.0};
};

inline AnalyticField sine_modes(int n, std::vector<SineMode> modes) {
  if (modes.empty()) throw std::invalid_argument("sine_modes: at least one mode required");
  const int N = static_cast<int>(modes.front().coeff.size());
  for (const auto& md : modes)
    if (static_cast<int>(md.coeff.size()) != N)
      throw std::invalid_argument("sine_modes: all modes need the same component count");
  return {N, [n, modes = std::move(modes)](std::span<const double> x, std::span<double> out) {
            std::fill(out.begin(), out.end(), 0.0);
            for (const auto& md : modes) {
              double s = 1.0;
              for (int d = 0; d < n; ++d) s *= std::sin(md.k[d] * std::numbers::pi * x[d]);
              for (std::size_t c = 0; c < out.size(); ++c) out[c] += md.coeff[c] * s;
            }
          }};
}

/// amplitude * prod_d 4 x_d (1 - x_d), peak value |amplitude| at the centre.
inline AnalyticField poly_bump(int n, std::vector<double> amplitude) {
  const int N = static_cast<int>(amplitude.size());
  return {N, [n, amplitude = std::move(amplitude)](std::span<const double> x, std::span<double> out) {
            double s = 1.0;
            for (int d = 0; d < n; ++d) s *= 4.0 * x[d] * (1.0 - x[d]);
            for (std::size_t c = 0; c < out.size(); ++c) out[c] = amplitude[c] * s;
          }};
}

/// True when the field vanishes (to 1e-12) on a lattice of points on every face.
inline bool vanishes_on_boundary(const AnalyticField& f, int n, int samples_per_axis = 9) {
  std::vector<double> out(f.components);
  std::array<double, 3> x{};
  const int total = static_cast<int>(ipow(samples_per_axis, n - 1));
  for (int face = 0; face < n; ++face) {
    for (double side : {0.0, 1.0}) {
      for (int s = 0; s < total; ++s) {
        int rem = s;
        for (int d = 0; d < n; ++d) {
          if (d == face) {
            x[d] = side;
            continue;
          }
          x[d] = (rem % samples_per_axis + 0.5) / samples_per_axis;
          rem /= samples_per_axis;
        }
        f.eval(std::span<const double>(x.data(), n), out);
        for (double v : out)
          if (std::abs(v) > 1e-12) return false;
      }
    }
  }
  return true;
}

/// Gauss–Legendre nodes and weights on [0,1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order) {
  std::vector<double> x(order), w(order);
  for (int i = 0; i < order; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= order; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = order * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = 0.5 * (1.0 - z);
    w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

/// Integral of |x|^{-beta} over [0,1]^n, beta < n, by self-similarity:
/// the corner subcube [0,1/2]^n contributes 2^{beta-n} times the whole, the
/// other 2^n - 1 subcubes are smooth and handled by tensor Gauss–Legendre.
inline double radial_power_unit_cube(double beta, int n) {
  const auto [gx, gw] = gauss_legendre(16);
  const int q = static_cast<int>(gx.size());
  double rest = 0.0;
  for (int bits = 1; bits < (1 << n); ++bits) {
    std::array<double, 3> off{};
    for (int d = 0; d < n; ++d) off[d] = (bits & (1 << d)) ? 0.5 : 0.0;
    const int pts = static_cast<int>(ipow(q, n));
    for (int s = 0; s < pts; ++s) {
      int rem = s;
      double r2 = 0.0, wt = 1.0;
      for (int d = 0; d < n; ++d) {
        const int j = rem % q;
        rem /= q;
        const double xd = off[d] + 0.5 * gx[j];
        r2 += xd * xd;
        wt *= 0.5 * gw[j];
      }
      rest += wt * std::pow(r2, -0.5 * beta);
    }
  }
  return rest / (1.0 - std::pow(2.0, beta - n));
}

/// Temporal amplitude a(t) of a separable source.
struct TimeProfile {
  enum class Kind { Constant, SpikeTrain };
  Kind kind = Kind::Constant;
  double amplitude = 1.0;
  double period = 0.1;  // spike train only
  double width = 0.01;  // spike train only

  /// For the spike train the pulse height is amplitude * sqrt(period/width),
  /// so the L^2 mass per period is amplitude^2 * period.
  double operator()(double t) const {
    if (kind == Kind::Constant) return amplitude;
    const double phase = std::fmod(t, period);
    return phase < width ? amplitude * std::sqrt(period / width) : 0.0;
  }
};

/// Separable source f(x,t) = a(t) shape(x).
struct Forcing {
  VectorField shape;
  TimeProfile profile;

  VectorField at(double t) const { return profile(t) * VectorField(shape); }
};

struct RoughRadialSpec {
  std::array<double, 3> x0{0.5, 0.5, 0.5};
  double beta = 1.4;
  std::vector<double> direction{1.0};
};

/// Nodal samples of |x - x0|^{-beta} d, d a unit vector in component space.
/// A node that coincides with x0 receives the mean of |x - x0|^{-beta} over
/// its cell [x0 - h/2, x0 + h/2]^n.
inline VectorField rough_radial_shape(const Grid& grid, const RoughRadialSpec& spec) {
  const int n = grid.n;
  if (!(spec.beta >= 0.0 && spec.beta < 0.5 * n))
    throw std::invalid_argument("rough forcing needs 0 <= beta < n/2 to stay square integrable, got beta = " +
                                std::to_string(spec.beta));
  double norm = 0.0;
  for (double d : spec.direction) norm += d * d;
  norm = std::sqrt(norm);
  if (!(norm > 0.0)) throw std::invalid_argument("rough forcing direction must be nonzero");
  const int N = static_cast<int>(spec.direction.size());
  const double h = grid.h();
  const double cell_mean = std::pow(2.0, spec.beta) * std::pow(h, -spec.beta) *
                           radial_power_unit_cube(spec.beta, n);
  VectorField f(grid, N);
  for (std::size_t i = 0; i < grid.nodes(); ++i) {
    auto x = grid.coords(i);
    double r2 = 0.0;
    for (int d = 0; d < n; ++d) r2 += (x[d] - spec.x0[d]) * (x[d] - spec.x0[d]);
    const double r = std::sqrt(r2);
    const double v = r < 1e-12 * h ? cell_mean : std::pow(r, -spec.beta);
    for (int c = 0; c < N; ++c) f(i, c) = v * spec.direction[c] / norm;
  }
  return f;
}

inline Forcing make_rough_forcing(const Grid& grid, const RoughRadialSpec& spec, TimeProfile profile) {
  return {rough_radial_shape(grid, spec), profile};
}

/// f = -div S(grad u*) evaluated from the closed form alone: grad u* by
/// fourth-order central differences at spacing h/4, then the flux divergence
/// by the same fourth-order stencil. Independent of the discrete operators
/// used by the solvers.
inline VectorField manufactured_forcing(const Grid& grid, const AnalyticField& u_star,
                                        const NonlinearityParams& prm) {
  prm.validate();
  const int n = grid.n, N = u_star.components;
  if (!vanishes_on_boundary(u_star, n))
    throw std::invalid_argument("manufactured solution must vanish on the boundary of the unit box");
  const double hf = grid.h() / 4.0;
  const std::array<double, 4> off{2.0, 1.0, -1.0, -2.0};
  const std::array<double, 4> wt{-1.0, 8.0, -8.0, 1.0};

  std::vector<double> tmp(N);
  auto grad_at = [&](std::array<double, 3> y) {
    std::vector<double> g(N * n, 0.0);
    for (int d = 0; d < n; ++d) {
      for (int s = 0; s < 4; ++s) {
        auto z = y;
        z[d] += off[s] * hf;
        u_star.eval(std::span<const double>(z.data(), n), tmp);
        for (int c = 0; c < N; ++c) g[c * n + d] += wt[s] * tmp[c];
      }
      for (int c = 0; c < N; ++c) g[c * n + d] /= 12.0 * hf;
    }
    return g;
  };

  VectorField f(grid, N);
  for (std::size_t i = 0; i < grid.nodes(); ++i) {
    const auto x = grid.coords(i);
    std::vector<double> div(N, 0.0);
    for (int d = 0; d < n; ++d) {
      for (int s = 0; s < 4; ++s) {
        auto y = x;
        y[d] += off[s] * hf;
        const auto S = stress(grad_at(y), prm);
        for (int c = 0; c < N; ++c) div[c] += wt[s] * S[c * n + d];
      }
    }
    for (int c = 0; c < N; ++c) f(i, c) = -div[c] / (12.0 * hf);
  }
  return f;
}

/// Cusp initial datum amplitude * prod_d sin(pi x_d) * |x - x0|^gamma * d.
/// grad u0 is in L^p when gamma > 1 - n/p; gamma > 0 keeps nodal values finite.
inline AnalyticField cusp_initial(int n, double p, double gamma, std::array<double, 3> x0,
                                  std::vector<double> direction, double amplitude) {
  if (!(gamma > 0.0 && gamma > 1.0 - n / p))
    throw std::invalid_argument("cusp exponent must satisfy gamma > max(0, 1 - n/p)");
  const int N = static_cast<int>(direction.size());
  return {N, [=](std::span<const double> x, std::span<double> out) {
            double s = amplitude, r2 = 0.0;
            for (int d = 0; d < n; ++d) {
              s *= std::sin(std::numbers::pi * x[d]);
              r2 += (x[d] - x0[d]) * (x[d] - x0[d]);
            }
            s *= std::pow(r2, 0.5 * gamma);
            for (int c = 0; c < N; ++c) out[c] = s * direction[c];
          }};
}

/// Continuum Laplacian eigenvalue pi^2 |k|^2 of a sine mode.
inline double continuum_eigenvalue(const SineMode& md, int n) {
  double s = 0.0;
  for (int d = 0; d < n; ++d) s += md.k[d] * md.k[d];
  return std::numbers::pi * std::numbers::pi * s;
}

/// Eigenvalue of the (2n+1)-point Laplacian on the grid for a sine mode.
inline double discrete_eigenvalue(const SineMode& md, const Grid& g) {
  double s = 0.0;
  const double h = g.h();
  for (int d = 0; d < g.n; ++d) {
    const double v = std::sin(0.5 * md.k[d] * std::numbers::pi * h);
    s += 4.0 * v * v / (h * h);
  }
  return s;
}

/// Exact heat-equation solution for sine-mode data and f = 0, sampled at
/// t_k = k tau. `discrete` selects the grid eigenvalues together with the
/// implicit Euler factor (1 + tau lambda_h)^{-k}; otherwise exp(-lambda t).
inline Trajectory heat_reference(const std::vector<SineMode>& modes, double tau, int steps, const Grid& grid,
                                 bool discrete) {
  Trajectory tr;
  tr.tau = tau;
  for (int k = 0; k <= steps; ++k) {
    const double t = k * tau;
    std::vector<SineMode> scaled = modes;
    for (auto& md : scaled) {
      const double factor = discrete ? std::pow(1.0 + tau * discrete_eigenvalue(md, grid), -k)
                                     : std::exp(-continuum_eigenvalue(md, grid.n) * t);
      for (double& c : md.coeff) c *= factor;
    }
    tr.push(k, t, sample(grid, sine_modes(grid.n, scaled)));
  }
  return tr;
}

}  // namespace plap
