#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "stablab/dataset.hpp"
#include "stablab/errors.hpp"
#include "stablab/linalg.hpp"

namespace stablab {

struct SvmSolution {
  Vec v_hat;
  double b_hat = 0.0;
  double gamma = 0.0;  // 1 / ||v_hat||
  std::vector<std::size_t> support_indices;
  Vec dual_values;
  double kkt_residual = 0.0;

  // [v^T, b]^T in the augmented space, comparable to heads trained on
  // augmented features (last coordinate multiplies -1).
  Vec augmented_w() const {
    Vec w = v_hat;
    w.push_back(b_hat);
    return w;
  }
};

struct SvmOptions {
  double kkt_tol = 1e-8;       // convergence: max violating-pair gap
  double support_tol = 1e-6;   // support-vector classification
  long max_pair_updates = 1000000;
  double alpha_guard = 1e10;   // dual growth past this means non-separable
};

// Hard-margin dual, solved by most-violating-pair coordinate ascent with
// lexicographic tie-break. min (1/2) a^T Q a - 1^T a, Q_ij = y_i y_j <x_i,x_j>,
// s.t. a >= 0, y^T a = 0.
inline SvmSolution solve_hard_margin(const std::vector<Vec>& xs,
                                     const std::vector<int>& ys,
                                     const SvmOptions& opt = {}) {
  std::size_t n = xs.size();
  if (n < 2 || ys.size() != n) throw ShapeError("solve_hard_margin: bad input sizes");
  bool has_pos = false, has_neg = false;
  for (int y : ys) (y > 0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw DegenerateClassError("solve_hard_margin: both classes required");

  Vec alpha(n, 0.0);
  Vec grad(n, -1.0);  // G = Q a - 1
  std::vector<double> self_k(n);
  for (std::size_t i = 0; i < n; ++i) self_k[i] = dot(xs[i], xs[i]);

  auto kernel_row = [&](std::size_t i, Vec& row) {
    for (std::size_t k = 0; k < n; ++k) row[k] = dot(xs[i], xs[k]);
  };
  Vec ki(n), kj(n);

  double gap = 0.0;
  long iter = 0;
  for (; iter < opt.max_pair_updates; ++iter) {
    // i maximizes -y G over I_up, j minimizes it over I_low
    std::size_t bi = n, bj = n;
    double m = 0.0, M = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double v = -ys[k] * grad[k];
      bool in_up = ys[k] > 0 || alpha[k] > 0.0;
      bool in_low = ys[k] < 0 || alpha[k] > 0.0;
      if (in_up && (bi == n || v > m)) { bi = k; m = v; }
      if (in_low && (bj == n || v < M)) { bj = k; M = v; }
    }
    gap = m - M;
    if (gap <= opt.kkt_tol) break;

    kernel_row(bi, ki);
    kernel_row(bj, kj);
    double curv = self_k[bi] + self_k[bj] - 2.0 * ki[bj];
    if (curv <= 0.0)
      throw InfeasibleError("solve_hard_margin: coincident points with opposing labels");
    double t = gap / curv;
    if (ys[bi] < 0) t = std::min(t, alpha[bi]);
    if (ys[bj] > 0) t = std::min(t, alpha[bj]);

    alpha[bi] += ys[bi] * t;
    alpha[bj] -= ys[bj] * t;
    for (std::size_t k = 0; k < n; ++k) grad[k] += ys[k] * t * (ki[k] - kj[k]);

    if (alpha[bi] > opt.alpha_guard || alpha[bj] > opt.alpha_guard)
      throw InfeasibleError("solve_hard_margin: dual growth guard tripped (non-separable input?)");
  }

  SvmSolution sol;
  sol.dual_values = alpha;
  sol.v_hat.assign(xs.front().size(), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (alpha[i] > 0.0) axpy(alpha[i] * ys[i], xs[i], sol.v_hat);

  // intercept: average of v.x_i - y_i over active dual variables
  double bsum = 0.0;
  std::size_t bcnt = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] > opt.support_tol * std::max(1.0, *std::max_element(alpha.begin(), alpha.end()))) {
      bsum += dot(sol.v_hat, xs[i]) - ys[i];
      ++bcnt;
    }
  }
  sol.b_hat = bcnt ? bsum / static_cast<double>(bcnt) : 0.0;

  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double margin_i = ys[i] * (dot(sol.v_hat, xs[i]) - sol.b_hat);
    worst = std::max(worst, 1.0 - margin_i);
    if (margin_i <= 1.0 + opt.support_tol) sol.support_indices.push_back(i);
  }
  sol.kkt_residual = worst;
  double vn = norm(sol.v_hat);
  if (vn == 0.0) throw InfeasibleError("solve_hard_margin: zero weight vector");
  sol.gamma = 1.0 / vn;

  if (iter >= opt.max_pair_updates && gap > 1e-6)
    throw ConvergenceError("solve_hard_margin: iteration cap reached", gap);
  return sol;
}

inline SvmSolution solve_hard_margin(const LabeledDataset& ds, const SvmOptions& opt = {}) {
  return solve_hard_margin(ds.features, ds.labels, opt);
}

inline double margin(const SvmSolution& sol) {
  double vn = norm(sol.v_hat);
  if (vn == 0.0) throw std::domain_error("margin: zero weight vector");
  return 1.0 / vn;
}

struct KktReport {
  double max_violation = 0.0;
  std::size_t support_pos = 0;
  std::size_t support_neg = 0;
  double reconstruction_error = 0.0;  // ||v - sum a_i y_i x_i||
  double dual_balance = 0.0;          // |sum a_i y_i|
};

// Recomputes every certificate quantity from the dataset; cached fields in
// the solution are not trusted.
inline KktReport kkt_report(const SvmSolution& sol, const LabeledDataset& ds) {
  if (ds.size() != sol.dual_values.size())
    throw ShapeError("kkt_report: dual/sample count mismatch");
  KktReport rep;
  Vec recon(sol.v_hat.size(), 0.0);
  double bal = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    double m = ds.labels[i] * (dot(sol.v_hat, ds.features[i]) - sol.b_hat);
    rep.max_violation = std::max(rep.max_violation, 1.0 - m);
    axpy(sol.dual_values[i] * ds.labels[i], ds.features[i], recon);
    bal += sol.dual_values[i] * ds.labels[i];
  }
  for (std::size_t i : sol.support_indices)
    (ds.labels[i] > 0 ? rep.support_pos : rep.support_neg)++;
  rep.reconstruction_error = norm(sub(sol.v_hat, recon));
  rep.dual_balance = std::abs(bal);
  return rep;
}

}  // namespace stablab
