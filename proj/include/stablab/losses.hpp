#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "stablab/dataset.hpp"
#include "stablab/errors.hpp"
#include "stablab/linalg.hpp"

namespace stablab {

using LinearHead = Vec;  // w = [v^T, b]^T acting on augmented features

enum class LossKind { logistic, exponential };

inline LossKind loss_kind_from_name(const std::string& name) {
  if (name == "logistic") return LossKind::logistic;
  if (name == "exponential") return LossKind::exponential;
  throw ParameterError("unknown loss kind: " + name);
}

inline const char* loss_kind_name(LossKind k) {
  return k == LossKind::logistic ? "logistic" : "exponential";
}

// Smoothness constant of the scalar loss.
inline double loss_beta(LossKind k) {
  return k == LossKind::logistic ? 0.25 : 1.0;
}

struct ValueGrad {
  double value;
  double deriv;
};

inline ValueGrad loss_value_grad(LossKind kind, double u) {
  if (!std::isfinite(u)) throw std::domain_error("loss_value_grad: non-finite margin");
  if (kind == LossKind::logistic) {
    // log(1 + e^{-u}) in the numerically stable branch form
    double value = u > 0 ? std::log1p(std::exp(-u)) : -u + std::log1p(std::exp(u));
    double deriv = u > 0 ? -std::exp(-u) / (1.0 + std::exp(-u)) : -1.0 / (1.0 + std::exp(u));
    return {value, deriv};
  }
  double e = std::exp(std::min(-u, 50.0));  // overflow guard
  return {e, -e};
}

struct HeadLoss {
  double value;
  Vec grad;
};

inline HeadLoss head_loss(const LinearHead& w, const std::vector<Vec>& aug,
                          const std::vector<int>& labels, LossKind kind) {
  if (aug.size() != labels.size()) throw ShapeError("head_loss: sample/label count mismatch");
  if (aug.empty()) throw ParameterError("head_loss: empty dataset");
  double value = 0.0;
  Vec grad(w.size(), 0.0);
  for (std::size_t i = 0; i < aug.size(); ++i) {
    if (aug[i].size() != w.size()) throw ShapeError("head_loss: dimension mismatch");
    double u = dot(w, aug[i]) * labels[i];
    auto [v, dv] = loss_value_grad(kind, u);
    value += v;
    axpy(dv * labels[i], aug[i], grad);
  }
  double inv_n = 1.0 / static_cast<double>(aug.size());
  value *= inv_n;
  scale(grad, inv_n);
  return {value, std::move(grad)};
}

// R(S) = 1 / (1 + ||mu_plus - mu_minus||), the class-mean-difference form of
// the weighted signed sum. Value in (0, 1].
inline double mmr_value(const LabeledDataset& ds, const Encoder& enc) {
  auto [mp, mm] = class_centers(ds, enc);
  return 1.0 / (1.0 + norm(sub(mp, mm)));
}

struct EncoderGrad {
  std::vector<Vec> d_matrix;  // same shape as Encoder::matrix()
  Vec d_offset;
};

inline EncoderGrad zero_encoder_grad(const Encoder& enc) {
  EncoderGrad g;
  g.d_matrix.assign(enc.matrix().size(), Vec(enc.matrix().front().size(), 0.0));
  g.d_offset.assign(enc.offset().size(), 0.0);
  return g;
}

// Analytic gradient of mmr_value in the affine encoder parameters. The offset
// cancels in the difference of means, so d_offset is identically zero.
inline EncoderGrad mmr_grad(const LabeledDataset& ds, const Encoder& enc) {
  if (!enc.is_affine())
    throw ParameterError("mmr_grad: identity encoder has no parameters");
  EncoderGrad g = zero_encoder_grad(enc);

  // raw-feature class-mean difference
  Vec dm(ds.dim(), 0.0);
  std::size_t np = 0, nm = 0;
  for (std::size_t i = 0; i < ds.size(); ++i)
    (ds.labels[i] > 0 ? np : nm)++;
  if (np == 0 || nm == 0) throw DegenerateClassError("mmr_grad: empty class");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    double wgt = ds.labels[i] > 0 ? 1.0 / static_cast<double>(np)
                                  : -1.0 / static_cast<double>(nm);
    axpy(wgt, ds.features[i], dm);
  }

  Vec delta(enc.matrix().size());
  for (std::size_t k = 0; k < enc.matrix().size(); ++k)
    delta[k] = dot(enc.matrix()[k], dm);
  double s = norm(delta);
  if (s == 0.0) return g;  // R is at its maximum; no descent direction

  double coef = -1.0 / ((1.0 + s) * (1.0 + s) * s);
  for (std::size_t k = 0; k < g.d_matrix.size(); ++k)
    for (std::size_t l = 0; l < g.d_matrix[k].size(); ++l)
      g.d_matrix[k][l] = coef * delta[k] * dm[l];
  return g;
}

struct MmrObjective {
  double value;
  Vec grad_w;
  EncoderGrad grad_encoder;  // classification term plus alpha * R term
};

inline MmrObjective mmr_objective(const LinearHead& w, const LabeledDataset& ds,
                                  const Encoder& enc, LossKind kind, double alpha) {
  if (alpha < 0 || !std::isfinite(alpha))
    throw ParameterError("mmr_objective: alpha must be finite and >= 0");
  auto aug = augment(ds, enc);
  auto hl = head_loss(w, aug, ds.labels, kind);

  MmrObjective out;
  out.value = hl.value;
  out.grad_w = std::move(hl.grad);

  if (enc.is_affine()) {
    out.grad_encoder = zero_encoder_grad(enc);
    std::size_t d_out = enc.matrix().size();
    double inv_n = 1.0 / static_cast<double>(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
      double u = dot(w, aug[i]) * ds.labels[i];
      double dv = loss_value_grad(kind, u).deriv * ds.labels[i] * inv_n;
      for (std::size_t k = 0; k < d_out; ++k) {
        for (std::size_t l = 0; l < ds.dim(); ++l)
          out.grad_encoder.d_matrix[k][l] += dv * w[k] * ds.features[i][l];
        out.grad_encoder.d_offset[k] += dv * w[k];
      }
    }
    if (alpha > 0) {
      EncoderGrad rg = mmr_grad(ds, enc);
      for (std::size_t k = 0; k < d_out; ++k)
        axpy(alpha, rg.d_matrix[k], out.grad_encoder.d_matrix[k]);
    }
  }
  if (alpha > 0) out.value += alpha * mmr_value(ds, enc);
  return out;
}

struct MultiHeadLoss {
  double value;
  std::vector<Vec> grads;  // one per head, already scaled by 1/H
};

inline MultiHeadLoss mh_loss(const std::vector<LinearHead>& heads,
                             const std::vector<Vec>& aug,
                             const std::vector<int>& labels, LossKind kind) {
  if (heads.empty()) throw ParameterError("mh_loss: need at least one head");
  double inv_h = 1.0 / static_cast<double>(heads.size());
  MultiHeadLoss out{0.0, {}};
  out.grads.reserve(heads.size());
  for (const auto& w : heads) {
    if (w.size() != heads.front().size()) throw ShapeError("mh_loss: head dimension mismatch");
    auto hl = head_loss(w, aug, labels, kind);
    out.value += hl.value * inv_h;
    scale(hl.grad, inv_h);
    out.grads.push_back(std::move(hl.grad));
  }
  return out;
}

inline LinearHead average_heads(const std::vector<LinearHead>& heads) {
  if (heads.empty()) throw ParameterError("average_heads: empty head sequence");
  LinearHead avg(heads.front().size(), 0.0);
  for (const auto& w : heads) {
    if (w.size() != avg.size()) throw ShapeError("average_heads: dimension mismatch");
    axpy(1.0, w, avg);
  }
  scale(avg, 1.0 / static_cast<double>(heads.size()));
  return avg;
}

}  // namespace stablab
