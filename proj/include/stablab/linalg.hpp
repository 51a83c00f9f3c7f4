#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace stablab {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(std::span<double> x, double alpha) {
  for (double& v : x) v *= alpha;
}

inline Vec sub(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("sub: size mismatch");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec add(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("add: size mismatch");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec scaled(std::span<const double> a, double alpha) {
  Vec r(a.begin(), a.end());
  scale(r, alpha);
  return r;
}

inline bool all_finite(std::span<const double> a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

inline Vec normalized(std::span<const double> a) {
  double n = norm(a);
  if (n == 0.0) throw std::domain_error("normalized: zero-norm vector");
  return scaled(a, 1.0 / n);
}

// ||a/||a|| - b/||b||||, range [0, 2]
inline double direction_gap(std::span<const double> a, std::span<const double> b) {
  double na = norm(a), nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw std::domain_error("direction_gap: zero-norm vector");
  if (a.size() != b.size()) throw std::invalid_argument("direction_gap: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] / na - b[i] / nb;
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace stablab
