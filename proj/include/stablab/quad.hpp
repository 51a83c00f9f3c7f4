#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "stablab/bounds.hpp"
#include "stablab/errors.hpp"
#include "stablab/rng.hpp"

namespace stablab {

// Second-order surrogate of full fine-tuning: n positive-definite per-sample
// quadratics vanishing at a shared optimum, spectra inside [mu, beta].
struct QuadraticTask {
  Eigen::VectorXd w_star;
  Eigen::VectorXd w0;
  std::vector<Eigen::MatrixXd> hessians;
  Eigen::MatrixXd mean_hessian;
  double mu = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;

  std::size_t dim() const { return static_cast<std::size_t>(w_star.size()); }
  std::size_t samples() const { return hessians.size(); }

  // mean Hessian with sample i removed
  Eigen::MatrixXd loo_mean_hessian(std::size_t i) const {
    double n = static_cast<double>(samples());
    return (n * mean_hessian - hessians[i]) / (n - 1.0);
  }
};

inline QuadraticTask make_quadratic_task(std::size_t d, std::size_t n, double mu,
                                         double beta, double init_distance,
                                         std::uint64_t seed) {
  if (!(mu > 0) || !(beta >= mu)) throw ParameterError("make_quadratic_task: need 0 < mu <= beta");
  if (d < 1 || n < 2) throw ParameterError("make_quadratic_task: need d >= 1 and n >= 2");
  if (init_distance < 0) throw ParameterError("make_quadratic_task: init_distance must be >= 0");

  SplitMix64 rng(seed);
  auto random_matrix = [&](std::size_t rows, std::size_t cols) {
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) m(r, c) = rng.normal();
    return m;
  };

  QuadraticTask task;
  task.mu = mu;
  task.beta = beta;
  task.seed = seed;
  task.w_star = random_matrix(d, 1);
  Eigen::VectorXd u = random_matrix(d, 1);
  double un = u.norm();
  task.w0 = task.w_star + (un > 0 ? init_distance / un : 0.0) * u;

  task.mean_hessian = Eigen::MatrixXd::Zero(d, d);
  task.hessians.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd diag(d);
    for (std::size_t k = 0; k < d; ++k) diag(k) = rng.uniform(mu, beta);
    // pin the declared bounds so (mu, beta) are tight
    diag(0) = mu;
    if (d > 1) diag(1) = beta;
    Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(random_matrix(d, d))
                            .householderQ();
    Eigen::MatrixXd h = q * diag.asDiagonal() * q.transpose();
    h = 0.5 * (h + h.transpose());  // exact symmetry

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.eigenvalues().minCoeff() < mu - 1e-9 ||
        es.eigenvalues().maxCoeff() > beta + 1e-9)
      throw std::runtime_error("make_quadratic_task: spectrum check failed");
    task.mean_hessian += h;
    task.hessians.push_back(std::move(h));
  }
  task.mean_hessian /= static_cast<double>(n);
  return task;
}

struct QuadValueGrad {
  double value;
  Eigen::VectorXd grad;
};

// Per-sample quadratic when an index is given, mean loss otherwise.
inline QuadValueGrad quad_loss_grad(const QuadraticTask& task, const Eigen::VectorXd& w,
                                    long index = -1) {
  if (w.size() != task.w_star.size()) throw ShapeError("quad_loss_grad: dimension mismatch");
  Eigen::VectorXd delta = w - task.w_star;
  const Eigen::MatrixXd& h = index < 0
                                 ? task.mean_hessian
                                 : task.hessians.at(static_cast<std::size_t>(index));
  Eigen::VectorXd g = h * delta;
  return {0.5 * delta.dot(g), std::move(g)};
}

struct QuadTrajectoryStep {
  long t;
  double loss;
  double dist;  // ||w_t - w_star||
};

struct QuadTrajectory {
  std::vector<QuadTrajectoryStep> steps;
  std::vector<Eigen::VectorXd> recorded_w;
  Eigen::VectorXd final_w;
};

// Full-batch GD on the mean quadratic with the given effective Hessian.
inline QuadTrajectory train_quad_with_hessian(const QuadraticTask& task,
                                              const Eigen::MatrixXd& h, long steps,
                                              double eta, long record_every) {
  if (record_every < 1) throw ParameterError("train_quad: record_every must be >= 1");
  QuadTrajectory traj;
  Eigen::VectorXd w = task.w0;
  auto record = [&](long t) {
    Eigen::VectorXd delta = w - task.w_star;
    traj.steps.push_back({t, 0.5 * delta.dot(h * delta), delta.norm()});
    traj.recorded_w.push_back(w);
  };
  record(0);
  for (long t = 1; t <= steps; ++t) {
    w -= eta * (h * (w - task.w_star));
    if (!w.allFinite()) throw DivergenceError("train_quad: non-finite parameters", t);
    if (t % record_every == 0 || t == steps) record(t);
  }
  traj.final_w = std::move(w);
  return traj;
}

inline QuadTrajectory train_quad(const QuadraticTask& task, long steps, double eta = 0.0,
                                 long record_every = 1, bool strict = true) {
  if (eta == 0.0) eta = 1.0 / task.beta;
  if (strict && eta > 1.0 / task.beta + 1e-15)
    throw ParameterError("train_quad: eta exceeds 1/beta in strict mode");
  return train_quad_with_hessian(task, task.mean_hessian, steps, eta, record_every);
}

// Tightest constant certifying per-sample Lipschitzness along the recorded
// points: max over recorded w and samples i of ||H_i (w - w_star)||.
inline double empirical_lipschitz(const QuadraticTask& task,
                                  const std::vector<Eigen::VectorXd>& recorded_w) {
  if (recorded_w.empty()) throw ParameterError("empirical_lipschitz: empty trajectory");
  double lhat = 0.0;
  for (const auto& w : recorded_w) {
    Eigen::VectorXd delta = w - task.w_star;
    for (const auto& h : task.hessians) lhat = std::max(lhat, (h * delta).norm());
  }
  return lhat;
}

struct Thm1Verification {
  double measured_mean = 0.0;
  double measured_max = 0.0;
  double lhat = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

// Runs the leave-one-out sweep with the quadratic GD trainer at eta = 1/beta
// and checks the measured gaps against the closed-form bound, using the
// union-of-trajectories empirical Lipschitz constant.
inline Thm1Verification verify_thm1(const QuadraticTask& task, long steps,
                                    long record_every = 0) {
  double eta = 1.0 / task.beta;
  if (record_every <= 0) record_every = std::max<long>(1, steps / 20);

  QuadTrajectory base = train_quad_with_hessian(task, task.mean_hessian, steps, eta,
                                                record_every);
  Thm1Verification out;
  out.lhat = empirical_lipschitz(task, base.recorded_w);

  std::size_t n = task.samples();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    QuadTrajectory loo = train_quad_with_hessian(task, task.loo_mean_hessian(i), steps,
                                                 eta, record_every);
    out.lhat = std::max(out.lhat, empirical_lipschitz(task, loo.recorded_w));
    double gap = (loo.final_w - base.final_w).norm();
    sum += gap;
    out.measured_max = std::max(out.measured_max, gap);
  }
  out.measured_mean = sum / static_cast<double>(n);

  double w_dist = (task.w0 - task.w_star).norm();
  out.rhs = task.mu < task.beta
                ? thm1_rhs(out.lhat, w_dist, task.beta, task.mu, n)
                : std::numeric_limits<double>::infinity();
  out.holds = out.measured_max <= out.rhs;
  return out;
}

}  // namespace stablab
