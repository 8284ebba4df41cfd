#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace plap {

inline std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

/// Pairwise (tree) summation. The recursion order depends only on the length,
/// so sums are bit-reproducible for a given input.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// Uniform grid on the unit box [0,1]^n with m interior nodes per axis.
/// Boundary nodes are implicit and carry the value 0.
struct Grid {
  int n = 3;
  int m = 15;

  Grid() = default;
  Grid(int dim, int interior) : n(dim), m(interior) {
    if (dim < 1 || dim > 3)
      throw std::invalid_argument("grid dimension n must be 1, 2 or 3, got " + std::to_string(dim));
    if (interior < 3)
      throw std::invalid_argument("grid needs m >= 3 interior nodes per axis, got " +
                                  std::to_string(interior));
  }

  double h() const { return 1.0 / (m + 1); }
  std::size_t nodes() const { return ipow(static_cast<std::size_t>(m), n); }
  std::size_t cells() const { return ipow(static_cast<std::size_t>(m + 1), n); }
  /// Volume weight h^n of one node or one cell.
  double volume() const { return std::pow(h(), n); }
  /// Measure of the node quadrature, (m h)^n.
  double node_measure() const { return static_cast<double>(nodes()) * volume(); }
  /// Measure of the cell quadrature; the (m+1)^n cells tile the box exactly.
  double cell_measure() const { return static_cast<double>(cells()) * volume(); }

  /// Axis indices (0-based, interior) of a node in row-major order, last axis fastest.
  std::array<int, 3> multi_index(std::size_t node) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int d = n - 1; d >= 0; --d) {
      idx[d] = static_cast<int>(node % m);
      node /= m;
    }
    return idx;
  }

  std::array<double, 3> coords(std::size_t node) const {
    auto idx = multi_index(node);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int d = 0; d < n; ++d) x[d] = (idx[d] + 1) * h();
    return x;
  }

  bool operator==(const Grid&) const = default;
};

/// N-component nodal values on the interior nodes of a grid, node-major.
class VectorField {
 public:
  VectorField() = default;
  VectorField(Grid grid, int components)
      : grid_(grid), components_(components), values_(grid.nodes() * check(components), 0.0) {}
  VectorField(Grid grid, int components, std::vector<double> values)
      : grid_(grid), components_(check(components)), values_(std::move(values)) {
    if (values_.size() != grid_.nodes() * static_cast<std::size_t>(components_))
      throw std::invalid_argument("vector field size does not match grid and component count");
    for (double v : values_)
      if (!std::isfinite(v)) throw std::invalid_argument("vector field has non-finite entries");
  }

  const Grid& grid() const { return grid_; }
  int components() const { return components_; }
  std::size_t nodes() const { return grid_.nodes(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::vector<double>& storage() { return values_; }

  double& operator()(std::size_t node, int c) { return values_[node * components_ + c]; }
  double operator()(std::size_t node, int c) const { return values_[node * components_ + c]; }

  /// Euclidean magnitude over components at one node.
  double magnitude(std::size_t node) const {
    double s = 0.0;
    for (int c = 0; c < components_; ++c) s += (*this)(node, c) * (*this)(node, c);
    return std::sqrt(s);
  }

  bool same_shape(const VectorField& o) const {
    return grid_ == o.grid_ && components_ == o.components_;
  }

  VectorField& operator+=(const VectorField& o) {
    require_same(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  VectorField& operator-=(const VectorField& o) {
    require_same(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  VectorField& operator*=(double a) {
    for (double& v : values_) v *= a;
    return *this;
  }

  void require_same(const VectorField& o) const {
    if (!same_shape(o)) throw std::invalid_argument("vector fields differ in grid or component count");
  }

 private:
  static int check(int components) {
    if (components < 1) throw std::invalid_argument("component count N must be >= 1");
    return components;
  }

  Grid grid_{};
  int components_ = 1;
  std::vector<double> values_;
};

inline VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
inline VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
inline VectorField operator*(double s, VectorField a) { return a *= s; }

/// Per-node tensors: rank 1 holds an N x n gradient, rank 2 an N x n x n Hessian.
struct TensorField {
  Grid grid;
  int components = 1;
  int rank = 1;
  std::vector<double> values;

  std::size_t per_node() const {
    return static_cast<std::size_t>(components) * ipow(static_cast<std::size_t>(grid.n), rank);
  }
  std::span<const double> at(std::size_t node) const {
    return std::span<const double>(values).subspan(node * per_node(), per_node());
  }
  /// Frobenius magnitude at one node.
  double magnitude(std::size_t node) const {
    double s = 0.0;
    for (double v : at(node)) s += v * v;
    return std::sqrt(s);
  }
};

/// Closed-form N-vector field on R^n, used for manufactured solutions and data.
struct AnalyticField {
  int components = 1;
  std::function<void(std::span<const double> x, std::span<double> out)> eval;
};

inline VectorField sample(const Grid& grid, const AnalyticField& f) {
  VectorField u(grid, f.components);
  std::vector<double> out(f.components);
  for (std::size_t i = 0; i < grid.nodes(); ++i) {
    auto x = grid.coords(i);
    f.eval(std::span<const double>(x.data(), grid.n), out);
    for (int c = 0; c < f.components; ++c) u(i, c) = out[c];
  }
  return u;
}

/// Index bookkeeping for the padded (m+2)^n node array that includes the
/// zero boundary layer. Used by every stencil kernel.
struct PaddedLayout {
  int n;
  int m;
  std::size_t side;
  std::array<std::size_t, 3> stride{0, 0, 0};
  std::size_t size;
  std::vector<std::size_t> interior;  // padded index of each interior node

  explicit PaddedLayout(const Grid& g) : n(g.n), m(g.m), side(g.m + 2) {
    std::size_t s = 1;
    for (int d = n - 1; d >= 0; --d) {
      stride[d] = s;
      s *= side;
    }
    size = s;
    interior.resize(g.nodes());
    for (std::size_t i = 0; i < g.nodes(); ++i) {
      auto idx = g.multi_index(i);
      std::size_t p = 0;
      for (int d = 0; d < n; ++d) p += (idx[d] + 1) * stride[d];
      interior[i] = p;
    }
  }

  std::vector<double> pad(const VectorField& u) const {
    const int N = u.components();
    std::vector<double> out(size * N, 0.0);
    for (std::size_t i = 0; i < interior.size(); ++i)
      for (int c = 0; c < N; ++c) out[interior[i] * N + c] = u(i, c);
    return out;
  }

  void unpad(std::span<const double> padded, VectorField& u) const {
    const int N = u.components();
    for (std::size_t i = 0; i < interior.size(); ++i)
      for (int c = 0; c < N; ++c) u(i, c) = padded[interior[i] * N + c];
  }
};

}  // namespace plap
