#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "plap/grid.hpp"
#include "plap/nonlinearity.hpp"

namespace plap {

// Flux-form (staggered) discretization.
//
// A cell is a box of side h spanned by 2^n grid nodes (boundary nodes
// included), so the (m+1)^n cells tile [0,1]^n. Each cell carries the squared
// gradient
//
//   Y_c = 2^{1-n} sum_{edges e of c} sum_j (delta_e u_j / h)^2,
//
// the mean over the 2^{n-1} parallel edges per axis of the squared one-sided
// differences. The discrete energy is h^n sum_c G(Y_c)/2, and the stiffness
// operator below is exactly its gradient with respect to the L^2_h inner
// product, so -div_h S is the energy gradient and summation by parts is exact.
// With a unit coefficient the operator is the (2n+1)-point Laplacian.
class FluxForm {
 public:
  explicit FluxForm(const Grid& g) : grid_(g), layout_(g) {
    const int n = g.n;
    const std::size_t side = g.m + 1;
    corners_.resize(g.cells());
    for (std::size_t c = 0; c < corners_.size(); ++c) {
      std::size_t rem = c, p = 0;
      for (int d = n - 1; d >= 0; --d) {
        p += (rem % side) * layout_.stride[d];
        rem /= side;
      }
      corners_[c] = p;
    }
    for (int d = 0; d < n; ++d) {
      for (int bits = 0; bits < (1 << n); ++bits) {
        if (bits & (1 << d)) continue;
        std::size_t off = 0;
        for (int k = 0; k < n; ++k)
          if (bits & (1 << k)) off += layout_.stride[k];
        edges_.emplace_back(off, off + layout_.stride[d]);
      }
    }
    std::vector<char> is_interior(layout_.size, 0);
    for (std::size_t p : layout_.interior) is_interior[p] = 1;
    for (std::size_t p = 0; p < layout_.size; ++p)
      if (!is_interior[p]) boundary_.push_back(p);
    edge_weight_ = 1.0 / (static_cast<double>(1 << (n - 1)) * g.h() * g.h());
  }

  const Grid& grid() const { return grid_; }
  const PaddedLayout& layout() const { return layout_; }
  std::size_t cells() const { return corners_.size(); }

  void cell_sq_gradient(std::span<const double> u, int N, std::span<double> Y) const {
    for (std::size_t c = 0; c < corners_.size(); ++c) {
      const std::size_t base = corners_[c];
      double s = 0.0;
      for (const auto& [a, b] : edges_) {
        const double* ua = &u[(base + a) * N];
        const double* ub = &u[(base + b) * N];
        for (int k = 0; k < N; ++k) {
          const double d = ub[k] - ua[k];
          s += d * d;
        }
      }
      Y[c] = s * edge_weight_;
    }
  }

  /// out = L_a u, the stiffness operator with per-cell coefficients a_c.
  /// Boundary entries of `out` are zero on return.
  void apply(std::span<const double> coef, std::span<const double> u, int N,
             std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t c = 0; c < corners_.size(); ++c) {
      if (coef[c] == 0.0) continue;
      const double a = coef[c] * edge_weight_;
      const std::size_t base = corners_[c];
      for (const auto& [ea, eb] : edges_) {
        const std::size_t s = (base + ea) * N, t = (base + eb) * N;
        for (int k = 0; k < N; ++k) {
          const double g = a * (u[t + k] - u[s + k]);
          out[s + k] -= g;
          out[t + k] += g;
        }
      }
    }
    for (std::size_t p : boundary_)
      for (int k = 0; k < N; ++k) out[p * N + k] = 0.0;
  }

  /// Diagonal of L_a per padded node (same for every component).
  void diagonal(std::span<const double> coef, std::span<double> diag) const {
    std::fill(diag.begin(), diag.end(), 0.0);
    for (std::size_t c = 0; c < corners_.size(); ++c) {
      const double a = coef[c] * edge_weight_;
      const std::size_t base = corners_[c];
      for (const auto& [ea, eb] : edges_) {
        diag[base + ea] += a;
        diag[base + eb] += a;
      }
    }
  }

  /// h^n sum_c a_c 2^{1-n} sum_e (delta_e u . delta_e w)/h^2, evaluated cell by cell.
  double pairing(std::span<const double> coef, std::span<const double> u,
                 std::span<const double> w, int N) const {
    std::vector<double> per_cell(corners_.size(), 0.0);
    for (std::size_t c = 0; c < corners_.size(); ++c) {
      if (coef[c] == 0.0) continue;
      const std::size_t base = corners_[c];
      double s = 0.0;
      for (const auto& [ea, eb] : edges_) {
        const std::size_t a = (base + ea) * N, b = (base + eb) * N;
        for (int k = 0; k < N; ++k) s += (u[b + k] - u[a + k]) * (w[b + k] - w[a + k]);
      }
      per_cell[c] = coef[c] * s * edge_weight_;
    }
    return grid_.volume() * pairwise_sum(per_cell);
  }

  /// Per-cell stress coefficient B(sqrt(Y_c)); zero where Y_c = 0, which is the
  /// continuous extension of B(|xi|) xi at xi = 0.
  template <FluxLaw Law>
  std::vector<double> stress_coefficients(const Law& law, std::span<const double> Y) const {
    std::vector<double> coef(Y.size());
    for (std::size_t c = 0; c < Y.size(); ++c) coef[c] = Y[c] > 0.0 ? law.coefficient_sq(Y[c]) : 0.0;
    return coef;
  }

 private:
  Grid grid_;
  PaddedLayout layout_;
  std::vector<std::size_t> corners_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<std::size_t> boundary_;
  double edge_weight_ = 1.0;
};

/// L^2_h inner product h^n sum_nodes u . w.
inline double inner(const VectorField& u, const VectorField& w) {
  u.require_same(w);
  std::vector<double> prod(u.values().size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = u.values()[i] * w.values()[i];
  return u.grid().volume() * pairwise_sum(prod);
}

inline std::vector<double> cell_sq_gradient(const VectorField& u) {
  FluxForm ff(u.grid());
  const auto up = ff.layout().pad(u);
  std::vector<double> Y(ff.cells());
  ff.cell_sq_gradient(up, u.components(), Y);
  return Y;
}

/// Discrete div S(grad u) in conservative flux form.
template <FluxLaw Law>
VectorField divergence_of_stress(const VectorField& u, const Law& law) {
  FluxForm ff(u.grid());
  const int N = u.components();
  const auto up = ff.layout().pad(u);
  std::vector<double> Y(ff.cells());
  ff.cell_sq_gradient(up, N, Y);
  const auto coef = ff.stress_coefficients(law, Y);
  std::vector<double> out(up.size());
  ff.apply(coef, up, N, out);
  for (double& v : out) v = -v;
  VectorField div(u.grid(), N);
  ff.layout().unpad(out, div);
  return div;
}

inline VectorField divergence_of_stress(const VectorField& u, const NonlinearityParams& prm) {
  return divergence_of_stress(u, PowerLaw(prm));
}

/// <S(D u), D w>_h with D the flux-form gradient, computed cell by cell.
template <FluxLaw Law>
double stress_pairing(const VectorField& u, const VectorField& w, const Law& law) {
  u.require_same(w);
  FluxForm ff(u.grid());
  const int N = u.components();
  const auto up = ff.layout().pad(u);
  const auto wp = ff.layout().pad(w);
  std::vector<double> Y(ff.cells());
  ff.cell_sq_gradient(up, N, Y);
  return ff.pairing(ff.stress_coefficients(law, Y), up, wp, N);
}

/// Energy integral h^n sum_c G(Y_c), i.e. the discrete counterpart of the
/// integral of G(|grad u|^2). The gradient-flow functional is half of this.
template <FluxLaw Law>
double energy_integral(const VectorField& u, const Law& law) {
  const auto Y = cell_sq_gradient(u);
  std::vector<double> dens(Y.size());
  for (std::size_t c = 0; c < Y.size(); ++c) dens[c] = law.density(Y[c]);
  return u.grid().volume() * pairwise_sum(dens);
}

inline double energy_integral(const VectorField& u, const NonlinearityParams& prm) {
  return energy_integral(u, PowerLaw(prm));
}

/// || D u ||_{L^p} over cells with the flux-form gradient.
inline double flux_gradient_norm(const VectorField& u, double p) {
  const auto Y = cell_sq_gradient(u);
  std::vector<double> v(Y.size());
  for (std::size_t c = 0; c < Y.size(); ++c) v[c] = std::pow(Y[c], 0.5 * p);
  return std::pow(u.grid().volume() * pairwise_sum(v), 1.0 / p);
}

/// Centered second-order gradient at interior nodes, N x n per node.
inline TensorField gradient(const VectorField& u) {
  const Grid& g = u.grid();
  const int N = u.components(), n = g.n;
  PaddedLayout L(g);
  const auto up = L.pad(u);
  TensorField t{g, N, 1, std::vector<double>(g.nodes() * N * n)};
  const double inv2h = 0.5 / g.h();
  for (std::size_t i = 0; i < g.nodes(); ++i) {
    const std::size_t p = L.interior[i];
    for (int c = 0; c < N; ++c)
      for (int d = 0; d < n; ++d)
        t.values[(i * N + c) * n + d] =
            (up[(p + L.stride[d]) * N + c] - up[(p - L.stride[d]) * N + c]) * inv2h;
  }
  return t;
}

/// Centered second differences, N x n x n per node; mixed terms use the
/// four-point cross stencil. Values outside the box are the zero boundary.
inline TensorField second_derivatives(const VectorField& u) {
  const Grid& g = u.grid();
  const int N = u.components(), n = g.n;
  PaddedLayout L(g);
  const auto up = L.pad(u);
  TensorField t{g, N, 2, std::vector<double>(g.nodes() * N * n * n)};
  const double h2 = g.h() * g.h();
  auto at = [&](std::size_t p, int c) { return up[p * N + c]; };
  for (std::size_t i = 0; i < g.nodes(); ++i) {
    const std::size_t p = L.interior[i];
    for (int c = 0; c < N; ++c) {
      double* out = &t.values[(i * N + c) * n * n];
      for (int a = 0; a < n; ++a) {
        const std::size_t sa = L.stride[a];
        out[a * n + a] = (at(p + sa, c) - 2.0 * at(p, c) + at(p - sa, c)) / h2;
        for (int b = a + 1; b < n; ++b) {
          const std::size_t sb = L.stride[b];
          // Interior indices are >= 1 on every axis, so p - sa - sb stays in the padded array.
          const double v = (at(p + sa + sb, c) - at(p + sa - sb, c) - at(p - sa + sb, c) +
                            at(p - sa - sb, c)) /
                           (4.0 * h2);
          out[a * n + b] = v;
          out[b * n + a] = v;
        }
      }
    }
  }
  return t;
}

/// Componentwise trace of a Hessian field, i.e. the discrete Laplacian.
inline VectorField laplacian_from(const TensorField& hess) {
  const int N = hess.components, n = hess.grid.n;
  VectorField lap(hess.grid, N);
  for (std::size_t i = 0; i < hess.grid.nodes(); ++i)
    for (int c = 0; c < N; ++c) {
      double s = 0.0;
      for (int a = 0; a < n; ++a) s += hess.values[((i * N + c) * n + a) * n + a];
      lap(i, c) = s;
    }
  return lap;
}

}  // namespace plap
