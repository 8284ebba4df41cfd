#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "plap/grid.hpp"
#include "plap/operators.hpp"

namespace plap {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace detail {
/// (h^n sum_i mag_i^q)^{1/q}, or max_i mag_i for q = inf.
inline double lq_of_magnitudes(std::vector<double>& mags, double q, double volume) {
  if (std::isinf(q)) {
    double mx = 0.0;
    for (double v : mags) mx = std::max(mx, v);
    return mx;
  }
  if (!(q >= 1.0)) throw std::invalid_argument("Lebesgue exponent must be >= 1");
  for (double& v : mags) v = std::pow(v, q);
  return std::pow(volume * pairwise_sum(mags), 1.0 / q);
}
}  // namespace detail

/// Discrete L^q norm with pointwise Euclidean magnitude over components.
inline double lebesgue_norm(const VectorField& u, double q) {
  std::vector<double> mags(u.nodes());
  for (std::size_t i = 0; i < u.nodes(); ++i) mags[i] = u.magnitude(i);
  return detail::lq_of_magnitudes(mags, q, u.grid().volume());
}

/// Discrete L^q norm with pointwise Frobenius magnitude.
inline double lebesgue_norm(const TensorField& t, double q) {
  std::vector<double> mags(t.grid.nodes());
  for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = t.magnitude(i);
  return detail::lq_of_magnitudes(mags, q, t.grid.volume());
}

struct SobolevNorms {
  double w1q = 0.0;
  double w2q = 0.0;
};

/// W^{1,q} and W^{2,q} norms with the centered gradient and Hessian.
inline SobolevNorms sobolev_norms(const VectorField& u, double q) {
  const double l = std::pow(lebesgue_norm(u, q), q);
  const double g = std::pow(lebesgue_norm(gradient(u), q), q);
  const double d2 = std::pow(lebesgue_norm(second_derivatives(u), q), q);
  return {std::pow(l + g, 1.0 / q), std::pow(l + g + d2, 1.0 / q)};
}

/// (||u||_p^p + ||D u||_p^p)^{1/p} with the flux-form gradient.
inline double flux_w1p_norm(const VectorField& u, double p) {
  return std::pow(std::pow(lebesgue_norm(u, p), p) + std::pow(flux_gradient_norm(u, p), p), 1.0 / p);
}

/// Which spatial norm a Bochner norm integrates in time.
struct SpatialNorm {
  enum class Kind { Lq, GradLq, FluxGradLq, W1q, W2q, HessLq };
  Kind kind = Kind::Lq;
  double q = 2.0;

  double operator()(const VectorField& u) const {
    switch (kind) {
      case Kind::Lq: return lebesgue_norm(u, q);
      case Kind::GradLq: return lebesgue_norm(gradient(u), q);
      case Kind::FluxGradLq: return flux_gradient_norm(u, q);
      case Kind::W1q: return sobolev_norms(u, q).w1q;
      case Kind::W2q: return sobolev_norms(u, q).w2q;
      case Kind::HessLq: return lebesgue_norm(second_derivatives(u), q);
    }
    return 0.0;
  }
};

/// Time-indexed discrete solution. snapshots[j] is u at time times[j];
/// times[0] = 0 holds the initial data.
struct Trajectory {
  double tau = 0.0;
  std::vector<double> times;
  std::vector<int> steps;
  std::vector<VectorField> snapshots;

  bool empty() const { return snapshots.empty(); }
  double final_time() const { return times.empty() ? 0.0 : times.back(); }

  void push(int step, double t, VectorField u) {
    if (!snapshots.empty() && !snapshots.front().same_shape(u))
      throw std::invalid_argument("trajectory snapshots must share grid and component count");
    steps.push_back(step);
    times.push_back(t);
    snapshots.push_back(std::move(u));
  }
};

/// (sum_j (t_j - t_{j-1}) X(u_j)^r)^{1/r} over stored snapshots j >= 1; the
/// initial snapshot is excluded. r = inf gives max_{j>=1} X(u_j).
inline double bochner_norm(const Trajectory& traj, double r, const SpatialNorm& spatial) {
  if (traj.snapshots.size() < 2) throw std::invalid_argument("bochner_norm: trajectory has no steps");
  if (std::isinf(r)) {
    double mx = 0.0;
    for (std::size_t j = 1; j < traj.snapshots.size(); ++j) mx = std::max(mx, spatial(traj.snapshots[j]));
    return mx;
  }
  if (!(r > 0.0)) throw std::invalid_argument("bochner_norm: time exponent must be positive");
  std::vector<double> terms;
  for (std::size_t j = 1; j < traj.snapshots.size(); ++j)
    terms.push_back((traj.times[j] - traj.times[j - 1]) * std::pow(spatial(traj.snapshots[j]), r));
  return std::pow(pairwise_sum(terms), 1.0 / r);
}

/// Hölder seminorm max |u(x)-u(y)| / |x-y|^alpha over axis-neighbour pairs
/// (including neighbours on the boundary, where u = 0) and either all pairs of
/// interior nodes (m^n <= 4096) or 10^6 seeded random pairs.
inline double holder_seminorm(const VectorField& u, double alpha, std::uint64_t seed = 0) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("Hölder exponent must lie in (0,1]");
  const Grid& g = u.grid();
  const int N = u.components();
  const std::size_t nodes = g.nodes();
  std::vector<std::array<double, 3>> x(nodes);
  for (std::size_t i = 0; i < nodes; ++i) x[i] = g.coords(i);

  auto diff = [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (int c = 0; c < N; ++c) {
      const double d = u(i, c) - u(j, c);
      s += d * d;
    }
    return std::sqrt(s);
  };
  auto dist = [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (int d = 0; d < g.n; ++d) s += (x[i][d] - x[j][d]) * (x[i][d] - x[j][d]);
    return std::sqrt(s);
  };

  double best = 0.0;
  const double hpow = std::pow(g.h(), alpha);
  for (std::size_t i = 0; i < nodes; ++i) {
    auto idx = g.multi_index(i);
    for (int d = 0; d < g.n; ++d) {
      if (idx[d] == 0 || idx[d] == g.m - 1) best = std::max(best, u.magnitude(i) / hpow);
      if (idx[d] + 1 < g.m) {
        std::size_t j = i + ipow(g.m, g.n - 1 - d);
        best = std::max(best, diff(i, j) / hpow);
      }
    }
  }

  if (nodes <= 4096) {
    // |x_i - x_j|^alpha depends only on the index offset
    const int side = 2 * g.m - 1;
    std::vector<double> inv_dist(ipow(static_cast<std::size_t>(side), g.n));
    for (std::size_t o = 0; o < inv_dist.size(); ++o) {
      std::size_t rem = o;
      double s = 0.0;
      for (int d = 0; d < g.n; ++d) {
        const double k = static_cast<double>(rem % side) - (g.m - 1);
        s += k * k;
        rem /= side;
      }
      inv_dist[o] = s > 0.0 ? std::pow(std::sqrt(s) * g.h(), -alpha) : 0.0;
    }
    std::vector<std::array<int, 3>> idx(nodes);
    for (std::size_t i = 0; i < nodes; ++i) idx[i] = g.multi_index(i);
    for (std::size_t i = 0; i < nodes; ++i)
      for (std::size_t j = i + 1; j < nodes; ++j) {
        std::size_t o = 0;
        for (int d = g.n - 1; d >= 0; --d) o = o * side + (idx[j][d] - idx[i][d] + g.m - 1);
        best = std::max(best, diff(i, j) * inv_dist[o]);
      }
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, nodes - 1);
    for (int k = 0; k < 1000000; ++k) {
      const std::size_t i = pick(rng), j = pick(rng);
      if (i == j) continue;
      best = std::max(best, diff(i, j) / std::pow(dist(i, j), alpha));
    }
  }
  return best;
}

}  // namespace plap
