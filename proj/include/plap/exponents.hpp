#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace plap {

/// Thrown when an exponent formula is evaluated outside its domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct ExponentParams {
  double p = 1.8;
  int n = 3;
  double K = 1.0;  // Yudovich constant, C2(q) <= K q
  double q = 2.0;

  double conjugate() const { return p / (p - 1.0); }
};

/// Outcome of a strict-inequality admissibility test. `margin` is positive
/// exactly when the condition holds (up to the endpoint conventions noted
/// per check).
struct Condition {
  bool ok = false;
  double margin = 0.0;
};

namespace detail {
inline void require_p(double p) {
  if (!(p > 1.0 && p <= 2.0))
    throw DomainError("p must satisfy 1 < p <= 2, got " + std::to_string(p));
}
}  // namespace detail

/// Core exponent 2n(p-1)/(n-2(2-p)): the Lebesgue exponent q with r(q) = 2.
inline double hat_q(double p, int n) {
  detail::require_p(p);
  if (n < 3) throw DomainError("core exponent requires n >= 3, got n = " + std::to_string(n));
  const double den = n - 2.0 * (2.0 - p);
  if (!(den > 0.0)) throw DomainError("core exponent requires n - 2(2-p) > 0");
  return 2.0 * n * (p - 1.0) / den;
}

/// Forcing integrability exponent needed for W^{2,q} regularity.
inline double r_of_q(double q, double p, int n) {
  detail::require_p(p);
  if (!(q > 1.0)) throw DomainError("r(q) requires q > 1");
  if (n < 3) throw DomainError("r(q) requires n >= 3");
  if (q >= n) return q;
  return n * q / (n * (p - 1.0) + q * (2.0 - p));
}

/// 2n/(n+2) < p <= 2 for n > 3, 5/4 < p <= 2 for n = 3.
inline Condition check_bunov(double p, int n) {
  if (n < 3) throw DomainError("admissibility window is stated for n >= 3");
  const double lower = n == 3 ? 1.25 : 2.0 * n / (n + 2.0);
  return {p > lower && p <= 2.0, p - lower};
}

/// (2-p) C2 < 1.
inline Condition check_kkapas(double p, double c2) {
  if (!(c2 > 0.0)) throw DomainError("C2 must be positive");
  const double margin = 1.0 - (2.0 - p) * c2;
  return {(2.0 - p) * c2 < 1.0, margin};
}

struct OrasReport {
  Condition oras;                 // 2 - n/(2nK+2) < p <= 2
  std::optional<Condition> bolas; // (2-p) q_hat < 1/K, when q_hat is defined
  double threshold = 0.0;
};

inline OrasReport check_oras(double p, int n, double K) {
  if (n < 3) throw DomainError("sufficient condition is stated for n >= 3");
  if (!(K > 0.0)) throw DomainError("K must be positive");
  OrasReport r;
  r.threshold = 2.0 - n / (2.0 * n * K + 2.0);
  r.oras = {p > r.threshold && p <= 2.0, p - r.threshold};
  if (p > 1.0 && p <= 2.0) {
    const double qh = hat_q(p, n);
    const double lhs = (2.0 - p) * qh;
    r.bolas = Condition{lhs < 1.0 / K, 1.0 / K - lhs};
  }
  return r;
}

/// Hölder exponent of the n = 3 embedding of W^{2,q_hat}.
inline double holder_alpha(double p) {
  if (!(p > 1.5)) throw DomainError("Hölder exponent requires p > 3/2");
  return (p - 1.5) / (p - 1.0);
}

struct ExponentReport {
  double p = 0.0;
  int n = 3;
  double K = 1.0;
  double q_hat = 0.0;
  double r_of_q_hat = 0.0;
  bool bunov_ok = false;
  double bunov_margin = 0.0;
  double c2_used = 0.0;  // K q_hat, the pessimistic bound used for gating
  bool kkapas_ok = false;
  double kkapas_margin = 0.0;
  bool oras_ok = false;
  double oras_margin = 0.0;
  bool bolas_ok = false;
  double bolas_margin = 0.0;
  std::optional<double> holder_alpha;
  bool near_degenerate = false;  // q_hat within 1e-6 of 1
};

inline ExponentReport exponent_report(double p, int n, double K) {
  ExponentReport r;
  r.p = p;
  r.n = n;
  r.K = K;
  r.q_hat = hat_q(p, n);
  r.r_of_q_hat = r_of_q(r.q_hat, p, n);
  const auto b = check_bunov(p, n);
  r.bunov_ok = b.ok;
  r.bunov_margin = b.margin;
  r.c2_used = K * r.q_hat;
  const auto k = check_kkapas(p, r.c2_used);
  r.kkapas_ok = k.ok;
  r.kkapas_margin = k.margin;
  const auto o = check_oras(p, n, K);
  r.oras_ok = o.oras.ok;
  r.oras_margin = o.oras.margin;
  if (o.bolas) {
    r.bolas_ok = o.bolas->ok;
    r.bolas_margin = o.bolas->margin;
  }
  if (n == 3 && p > 1.5) r.holder_alpha = holder_alpha(p);
  r.near_degenerate = std::abs(r.q_hat - 1.0) <= 1e-6;
  return r;
}

}  // namespace plap
