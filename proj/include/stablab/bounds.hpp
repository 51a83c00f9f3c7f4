#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "stablab/errors.hpp"

namespace stablab {

// Closed-form right-hand sides of the stability bounds. Natural logarithms
// throughout; the existential constants (C, lambda, nu, xi) are explicit
// inputs, never defaulted.

namespace bound_detail {

inline void require(bool cond, const char* msg) {
  if (!cond) throw std::domain_error(msg);
}

inline double convergence_term(double C, double t) {
  require(t >= 3.0, "bound: t must be >= 3 so log log t is positive");
  return C * std::log(std::log(t)) / std::log(t);
}

// nu * max{ sqrt((2/(lam n))(1 + B/gamma)), (B + sqrt(B^2 + 8 n lam (1 + B/gamma))) / (2 n lam) }
inline double svm_shift_term(double nu, double lam, double n, double B, double gamma) {
  require(nu > 0 && lam > 0 && n > 0 && B > 0 && gamma > 0,
          "bound: nu, lambda, n, B, gamma must be positive");
  double q = 1.0 + B / gamma;
  double first = std::sqrt(2.0 / (lam * n) * q);
  double second = (B + std::sqrt(B * B + 8.0 * n * lam * q)) / (2.0 * n * lam);
  return nu * std::max(first, second);
}

}  // namespace bound_detail

inline double thm1_rhs(double L, double w_dist, double beta, double mu, double n) {
  bound_detail::require(mu > 0 && beta > 0, "thm1_rhs: mu and beta must be positive");
  bound_detail::require(mu < beta, "thm1_rhs: requires mu < beta");
  bound_detail::require(n >= 1, "thm1_rhs: n must be >= 1");
  bound_detail::require(L >= 0 && w_dist >= 0, "thm1_rhs: L and w_dist must be >= 0");
  double denom = n * (std::pow(1.0 - mu / beta, -0.25) - 1.0);
  return std::sqrt(2.0 * L * w_dist / beta) / denom;
}

inline double thm2_rhs(double C, double t, double nu, double lam, double n, double B,
                       double gamma) {
  return bound_detail::convergence_term(C, t) +
         bound_detail::svm_shift_term(nu, lam, n, B, gamma);
}

inline double cor1_rhs(double C, double t, double nu, double L, double lam, double n) {
  bound_detail::require(nu > 0 && lam > 0 && n > 0 && L >= 0,
                        "cor1_rhs: inputs must be positive");
  return bound_detail::convergence_term(C, t) + nu * L / (lam * n);
}

inline double mh_rhs(double C, double xi, double t, double H, double delta, double nu,
                     double lam, double n, double B, double gamma) {
  bound_detail::require(delta > 0 && delta < 1, "mh_rhs: delta must be in (0, 1)");
  double threshold = 2.0 + 8.0 * std::log(1.0 / delta);
  if (!(H > threshold))
    throw std::domain_error("mh_rhs: H must exceed 2 + 8 ln(1/delta) = " +
                            std::to_string(threshold));
  double factor = std::sqrt(threshold / H);
  return factor * xi * bound_detail::convergence_term(C, t) +
         bound_detail::svm_shift_term(nu, lam, n, B, gamma);
}

}  // namespace stablab
