#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "stablab/dataset.hpp"
#include "stablab/errors.hpp"
#include "stablab/linalg.hpp"
#include "stablab/losses.hpp"
#include "stablab/svm.hpp"

namespace stablab {

struct TrainConfig {
  double eta = 0.1;
  long steps = 1000;
  LossKind kind = LossKind::logistic;
  double init_scale = 0.01;  // sigma_0 of the seeded Gaussian init
  std::uint64_t seed = 0;
  long record_every = 100;
  bool strict_lr = true;          // reject eta above the admissible bound
  bool track_direction = true;    // record direction gap to the SVM solution

  void validate() const {
    if (!(eta > 0) || !std::isfinite(eta)) throw ParameterError("TrainConfig: eta must be > 0");
    if (steps < 0) throw ParameterError("TrainConfig: steps must be >= 0");
    if (init_scale < 0) throw ParameterError("TrainConfig: init_scale must be >= 0");
    if (record_every < 1) throw ParameterError("TrainConfig: record_every must be >= 1");
  }
};

struct TrajectoryStep {
  long t;
  double loss;
  double w_norm;
  double dir_gap;  // NaN when not tracked or w_t == 0
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  std::vector<Vec> recorded_w;  // parallel to steps
  LinearHead final_w;
  TrainConfig config;
};

// Largest singular value of the augmented design matrix, by power iteration
// on X~^T X~ with a deterministic seeded start vector.
inline double sigma_max(const std::vector<Vec>& aug, double rel_tol = 1e-10,
                        int max_iters = 10000) {
  if (aug.empty()) throw ParameterError("sigma_max: empty sample set");
  std::size_t d = aug.front().size();
  SplitMix64 rng(0x5eedu);
  Vec v(d);
  for (auto& x : v) x = rng.normal();
  scale(v, 1.0 / norm(v));

  double lam = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    // u = X~^T (X~ v)
    Vec u(d, 0.0);
    for (const auto& row : aug) axpy(dot(row, v), row, u);
    double nu = norm(u);
    if (nu == 0.0) return 0.0;
    double next = nu;  // Rayleigh estimate since ||v|| = 1
    scale(u, 1.0 / nu);
    v = std::move(u);
    if (it > 0 && std::abs(next - lam) <= rel_tol * std::abs(next))
      return std::sqrt(next);
    lam = next;
  }
  throw ConvergenceError("sigma_max: power iteration did not converge", lam);
}

// eta bound from the head-tuning setting: 2 / (beta * sigma_max(X~)).
inline double max_admissible_lr(const LabeledDataset& ds, const Encoder& enc,
                                LossKind kind) {
  auto aug = augment(ds, enc);
  double s = sigma_max(aug);
  if (s == 0.0) throw ParameterError("max_admissible_lr: zero design matrix");
  return 2.0 / (loss_beta(kind) * s);
}

inline LinearHead gaussian_init(std::size_t dim, double sigma0, std::uint64_t seed) {
  LinearHead w(dim, 0.0);
  if (sigma0 > 0) {
    SplitMix64 rng(seed);
    for (auto& v : w) v = sigma0 * rng.normal();
  }
  return w;
}

inline Trajectory train_gd(const LabeledDataset& ds, const Encoder& enc,
                           const TrainConfig& cfg,
                           const Vec* svm_reference = nullptr) {
  cfg.validate();
  auto aug = augment(ds, enc);
  std::size_t dim = aug.front().size();

  if (cfg.strict_lr) {
    double bound = 2.0 / (loss_beta(cfg.kind) * sigma_max(aug));
    if (cfg.eta >= bound)
      throw ParameterError("train_gd: eta exceeds the admissible bound (strict_lr)");
  }

  std::optional<Vec> ref;
  if (svm_reference) {
    ref = *svm_reference;
  } else if (cfg.track_direction) {
    ref = solve_hard_margin(ds.features, ds.labels).augmented_w();
  }

  Trajectory traj;
  traj.config = cfg;
  LinearHead w = gaussian_init(dim, cfg.init_scale, cfg.seed);

  auto record = [&](long t, double loss) {
    double wn = norm(w);
    double gap = std::numeric_limits<double>::quiet_NaN();
    if (ref && wn > 0) gap = direction_gap(w, *ref);
    traj.steps.push_back({t, loss, wn, gap});
    traj.recorded_w.push_back(w);
  };

  double loss = head_loss(w, aug, ds.labels, cfg.kind).value;
  record(0, loss);
  for (long t = 1; t <= cfg.steps; ++t) {
    auto hl = head_loss(w, aug, ds.labels, cfg.kind);
    axpy(-cfg.eta, hl.grad, w);
    if (!all_finite(w)) throw DivergenceError("train_gd: non-finite parameters", t);
    if (t % cfg.record_every == 0 || t == cfg.steps) {
      double l = head_loss(w, aug, ds.labels, cfg.kind).value;
      if (!std::isfinite(l)) throw DivergenceError("train_gd: non-finite loss", t);
      record(t, l);
    }
  }
  traj.final_w = std::move(w);
  return traj;
}

struct MultiHeadResult {
  std::vector<Trajectory> head_trajectories;  // empty unless keep_heads
  Trajectory averaged;                        // w-bar trajectory vs SVM direction
};

// Each head runs full-batch GD on its own loss with an independent seeded
// init (seed xor head index); the averaged head is tracked at the shared
// record points.
inline MultiHeadResult train_multihead(const LabeledDataset& ds, const Encoder& enc,
                                       const TrainConfig& cfg, std::size_t H,
                                       bool keep_heads = false,
                                       const Vec* svm_reference = nullptr) {
  if (H < 1) throw ParameterError("train_multihead: H must be >= 1");
  cfg.validate();

  std::optional<Vec> ref;
  if (svm_reference) {
    ref = *svm_reference;
  } else if (cfg.track_direction) {
    ref = solve_hard_margin(ds.features, ds.labels).augmented_w();
  }

  TrainConfig head_cfg = cfg;
  head_cfg.track_direction = false;
  std::vector<Trajectory> trajs;
  trajs.reserve(H);
  for (std::size_t h = 0; h < H; ++h) {
    head_cfg.seed = cfg.seed ^ static_cast<std::uint64_t>(h);
    trajs.push_back(train_gd(ds, enc, head_cfg,
                             ref ? &*ref : nullptr));
  }

  MultiHeadResult out;
  out.averaged.config = cfg;
  std::size_t points = trajs.front().steps.size();
  auto aug = augment(ds, enc);
  for (std::size_t p = 0; p < points; ++p) {
    Vec avg(trajs.front().recorded_w[p].size(), 0.0);
    for (const auto& tr : trajs) axpy(1.0, tr.recorded_w[p], avg);
    scale(avg, 1.0 / static_cast<double>(H));
    double wn = norm(avg);
    double gap = std::numeric_limits<double>::quiet_NaN();
    if (ref && wn > 0) gap = direction_gap(avg, *ref);
    double loss = head_loss(avg, aug, ds.labels, cfg.kind).value;
    out.averaged.steps.push_back({trajs.front().steps[p].t, loss, wn, gap});
    out.averaged.recorded_w.push_back(std::move(avg));
  }
  std::vector<LinearHead> finals;
  finals.reserve(H);
  for (const auto& tr : trajs) finals.push_back(tr.final_w);
  out.averaged.final_w = average_heads(finals);
  if (keep_heads) out.head_trajectories = std::move(trajs);
  return out;
}

struct MmrStep {
  long t;
  double loss;          // full objective
  double center_dist;   // ||mu_plus - mu_minus|| of the encoded data
  double margin;        // gamma_S of the encoded data
};

struct MmrResult {
  std::vector<MmrStep> steps;
  LinearHead final_w;
  Encoder final_encoder;
};

// Joint GD on (w, A) for L_MMR; the encoder offset is held fixed.
inline MmrResult train_mmr(const LabeledDataset& ds, const Encoder& enc0,
                           const LinearHead& w0, const TrainConfig& cfg,
                           double alpha, bool record_margin = true) {
  if (!enc0.is_affine()) throw ParameterError("train_mmr: encoder must be affine");
  cfg.validate();

  Encoder enc = enc0;
  LinearHead w = w0;
  MmrResult out;

  auto record = [&](long t, double value) {
    MmrStep st{t, value, 0.0, std::numeric_limits<double>::quiet_NaN()};
    auto [mp, mm] = class_centers(ds, enc);
    st.center_dist = norm(sub(mp, mm));
    if (record_margin) {
      LabeledDataset encoded;
      encoded.labels = ds.labels;
      for (const auto& x : ds.features) encoded.features.push_back(enc.encode(x));
      st.margin = solve_hard_margin(encoded).gamma;
    }
    out.steps.push_back(st);
  };

  record(0, mmr_objective(w, ds, enc, cfg.kind, alpha).value);
  for (long t = 1; t <= cfg.steps; ++t) {
    auto obj = mmr_objective(w, ds, enc, cfg.kind, alpha);
    axpy(-cfg.eta, obj.grad_w, w);
    for (std::size_t k = 0; k < enc.matrix().size(); ++k)
      axpy(-cfg.eta, obj.grad_encoder.d_matrix[k], enc.matrix()[k]);
    if (!all_finite(w)) throw DivergenceError("train_mmr: non-finite parameters", t);
    if (t % cfg.record_every == 0 || t == cfg.steps)
      record(t, mmr_objective(w, ds, enc, cfg.kind, alpha).value);
  }
  out.final_w = std::move(w);
  out.final_encoder = std::move(enc);
  return out;
}

}  // namespace stablab
