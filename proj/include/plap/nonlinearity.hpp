#pragma once

#include <cmath>
#include <concepts>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace plap {

struct NonlinearityParams {
  double p = 2.0;
  double mu = 0.0;

  void validate() const {
    if (!(p > 1.0 && p <= 2.0))
      throw std::invalid_argument("p must satisfy 1 < p <= 2, got " + std::to_string(p));
    if (!(mu >= 0.0) || !std::isfinite(mu))
      throw std::invalid_argument("mu must be finite and >= 0, got " + std::to_string(mu));
  }
};

/// Ellipticity coefficient B(s) = (mu + s)^{p-2}. At the singular point
/// (mu = 0, s = 0, p < 2) the value is +infinity; callers that need the flux
/// must go through stress(), which uses the continuous extension.
inline double b_coeff(double s, const NonlinearityParams& prm) {
  if (s < 0.0) throw std::domain_error("b_coeff: gradient magnitude must be >= 0");
  const double base = prm.mu + s;
  if (base == 0.0) return prm.p == 2.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return std::pow(base, prm.p - 2.0);
}

inline bool is_singular(double coeff) { return std::isinf(coeff); }

/// A(y) = B(sqrt(y)), y a squared gradient magnitude.
inline double a_coeff(double y, const NonlinearityParams& prm) {
  if (y < 0.0) throw std::domain_error("a_coeff: squared gradient must be >= 0");
  return b_coeff(std::sqrt(y), prm);
}

/// Energy density written in the gradient magnitude y:
///   G(y^2) = (2/p)(mu+y)^p - (2 mu/(p-1))(mu+y)^{p-1}.
/// The closed form is analytic for mu + y > 0, so it is evaluated there
/// without clamping.
inline double g_density(double y, const NonlinearityParams& prm) {
  const double z = prm.mu + y;
  const double p = prm.p;
  if (prm.mu == 0.0) return (2.0 / p) * std::pow(z, p);
  return (2.0 / p) * std::pow(z, p) - (2.0 * prm.mu / (p - 1.0)) * std::pow(z, p - 1.0);
}

/// C1 = 2^p / (p (p-1)).
inline double c1_constant(double p) { return std::pow(2.0, p) / (p * (p - 1.0)); }

struct GBounds {
  double lower = 0.0;        // (1/p)(mu+y)^p - C1 mu^p, the verified form
  double lower_mu2 = 0.0;    // same with C1 mu^2 in place of C1 mu^p
  double upper = 0.0;        // (2/p)(mu+y)^p
  double upper_outer = 0.0;  // (2^p/p)(y^p + mu^p)
};

inline GBounds g_bounds(double y, const NonlinearityParams& prm) {
  const double p = prm.p;
  const double zp = std::pow(prm.mu + y, p);
  const double c1 = c1_constant(p);
  GBounds b;
  b.lower = zp / p - c1 * std::pow(prm.mu, p);
  b.lower_mu2 = zp / p - c1 * prm.mu * prm.mu;
  b.upper = 2.0 * zp / p;
  b.upper_outer = std::pow(2.0, p) / p * (std::pow(y, p) + std::pow(prm.mu, p));
  return b;
}

/// S(xi) = B(|xi|) xi with |.| the Frobenius norm; S(0) = 0.
inline std::vector<double> stress(std::span<const double> grad, const NonlinearityParams& prm) {
  double s2 = 0.0;
  for (double g : grad) s2 += g * g;
  std::vector<double> out(grad.size(), 0.0);
  if (s2 == 0.0) return out;
  const double b = b_coeff(std::sqrt(s2), prm);
  for (std::size_t i = 0; i < grad.size(); ++i) out[i] = b * grad[i];
  return out;
}

struct StructuralConstants {
  double c0 = 0.0;
  double c1 = 0.0;          // C1 mu^2
  double c1_mu_p = 0.0;     // C1 mu^p
  double c0_tilde = 0.0;
  double c1_tilde = 0.0;
  double C1 = 0.0;
};

inline StructuralConstants structural_constants(const NonlinearityParams& prm) {
  StructuralConstants k;
  k.C1 = c1_constant(prm.p);
  k.c0 = 1.0 / prm.p;
  k.c1 = k.C1 * prm.mu * prm.mu;
  k.c1_mu_p = k.C1 * std::pow(prm.mu, prm.p);
  k.c0_tilde = std::pow(2.0, prm.p) / prm.p;
  k.c1_tilde = k.c0_tilde;
  return k;
}

/// What the discrete operators need from a flux law S(xi) = B(|xi|) xi:
/// the coefficient in squared-magnitude form and the energy density.
template <class T>
concept FluxLaw = requires(const T& law, double y) {
  { law.coefficient_sq(y) } -> std::convertible_to<double>;
  { law.density(y) } -> std::convertible_to<double>;
};

/// The (mu + s)^{p-2} family.
struct PowerLaw {
  NonlinearityParams params;

  explicit PowerLaw(NonlinearityParams prm) : params(prm) { params.validate(); }

  /// A(Y) for a squared magnitude Y > 0 (no singular check; hot path).
  double coefficient_sq(double Y) const {
    if (params.p == 2.0) return 1.0;
    return std::pow(params.mu + std::sqrt(Y), params.p - 2.0);
  }
  /// G(Y) for squared magnitude Y.
  double density(double Y) const { return g_density(std::sqrt(Y), params); }
};

}  // namespace plap
