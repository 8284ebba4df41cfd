#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "plap/grid.hpp"
#include "plap/norms.hpp"
#include "plap/operators.hpp"
#include "plap/sources.hpp"

namespace plap {

/// Empirical lower bound for the discrete Calderón–Zygmund constant C2(q):
/// the running max of ||D^2 v||_q / ||Delta v||_q over `samples` random
/// sine-mode combinations. Sample i depends only on (seed, i), so adding
/// samples never lowers the result. Never use this for gating.
inline double estimate_c2_lower(const Grid& grid, double q, int samples, std::uint64_t seed) {
  if (!(q > 1.0)) throw std::invalid_argument("estimate_c2_lower: q must exceed 1");
  if (samples < 1) throw std::invalid_argument("estimate_c2_lower: samples must be >= 1");
  std::mt19937_64 rng(seed);
  const int kmax = std::max(1, std::min(6, (grid.m + 1) / 2));
  std::uniform_int_distribution<int> n_modes(1, 4), wave(1, kmax);
  std::normal_distribution<double> coeff(0.0, 1.0);

  double best = 0.0;
  int used = 0;
  for (int s = 0; s < samples; ++s) {
    std::vector<SineMode> modes(n_modes(rng));
    for (auto& md : modes) {
      for (int d = 0; d < 3; ++d) md.k[d] = d < grid.n ? wave(rng) : 1;
      md.coeff = {coeff(rng)};
    }
    const VectorField v = sample(grid, sine_modes(grid.n, modes));
    const TensorField hess = second_derivatives(v);
    const double lap = lebesgue_norm(laplacian_from(hess), q);
    if (!(lap > 0.0)) continue;
    best = std::max(best, lebesgue_norm(hess, q) / lap);
    ++used;
  }
  if (used == 0) throw std::runtime_error("estimate_c2_lower: every sample had a vanishing Laplacian");
  return best;
}

}  // namespace plap
