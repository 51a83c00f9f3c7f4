#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "stablab/dataset.hpp"
#include "stablab/errors.hpp"
#include "stablab/linalg.hpp"
#include "stablab/parallel.hpp"
#include "stablab/svm.hpp"

namespace stablab {

using Trainer = std::function<Vec(const LabeledDataset&)>;

struct StabilityEntry {
  std::size_t index;
  double gap;
  bool skipped;
  std::string reason;
};

struct StabilityReport {
  std::vector<StabilityEntry> per_index;
  double mean_gap = 0.0;
  double std_gap = 0.0;
  std::uint64_t dataset_seed = 0;
  std::string trainer_fingerprint;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;

  void aggregate() {
    evaluated = skipped = 0;
    double sum = 0.0;
    for (const auto& e : per_index) {
      if (e.skipped) {
        ++skipped;
      } else {
        ++evaluated;
        sum += e.gap;
      }
    }
    mean_gap = evaluated ? sum / static_cast<double>(evaluated) : 0.0;
    double ss = 0.0;
    for (const auto& e : per_index)
      if (!e.skipped) ss += (e.gap - mean_gap) * (e.gap - mean_gap);
    std_gap = evaluated ? std::sqrt(ss / static_cast<double>(evaluated)) : 0.0;
  }
};

// Default sweep policy: every valid index for n <= 500, a seeded sample of
// 200 indices above that.
inline std::vector<std::size_t> loo_index_subset(std::size_t n, std::uint64_t seed,
                                                 std::size_t full_limit = 500,
                                                 std::size_t sample_size = 200) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (n <= full_limit) return idx;
  SplitMix64 rng(seed ^ 0x10c0ffeeULL);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(idx[i], idx[rng.below(i + 1)]);
  idx.resize(sample_size);
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace detail {

inline StabilityReport loo_sweep(const LabeledDataset& ds, const Trainer& trainer,
                                 const std::string& fingerprint, bool normalized,
                                 std::vector<std::size_t> subset, unsigned jobs) {
  if (subset.empty()) subset = loo_index_subset(ds.size(), ds.seed);
  Vec base = trainer(ds);
  if (normalized && norm(base) == 0.0)
    throw std::domain_error("loo stability: zero-norm base parameters");

  StabilityReport rep;
  rep.dataset_seed = ds.seed;
  rep.trainer_fingerprint = fingerprint;
  rep.per_index.resize(subset.size());
  parallel_for(subset.size(), [&](std::size_t k) {
    std::size_t i = subset[k];
    StabilityEntry e{i, 0.0, false, ""};
    try {
      LabeledDataset loo = leave_one_out(ds, i);
      Vec w = trainer(loo);
      e.gap = normalized ? direction_gap(w, base) : norm(sub(w, base));
    } catch (const DegenerateClassError& ex) {
      e.skipped = true;
      e.reason = ex.what();
    }
    rep.per_index[k] = std::move(e);
  }, jobs);
  rep.aggregate();
  return rep;
}

}  // namespace detail

inline StabilityReport normalized_loo_stability(const LabeledDataset& ds,
                                                const Trainer& trainer,
                                                const std::string& fingerprint = "",
                                                std::vector<std::size_t> subset = {},
                                                unsigned jobs = 0) {
  return detail::loo_sweep(ds, trainer, fingerprint, true, std::move(subset), jobs);
}

inline StabilityReport loo_model_stability(const LabeledDataset& ds,
                                           const Trainer& trainer,
                                           const std::string& fingerprint = "",
                                           std::vector<std::size_t> subset = {},
                                           unsigned jobs = 0) {
  return detail::loo_sweep(ds, trainer, fingerprint, false, std::move(subset), jobs);
}

// Leave-one-out sweep for the exact hard-margin solver. Removing a strict
// non-support vector leaves the (unique) optimum unchanged, so only support
// indices need a re-solve.
inline StabilityReport svm_loo_stability(const LabeledDataset& ds,
                                         bool normalized = true,
                                         std::vector<std::size_t> subset = {},
                                         unsigned jobs = 0) {
  if (subset.empty()) subset = loo_index_subset(ds.size(), ds.seed);
  SvmSolution base = solve_hard_margin(ds);
  Vec base_w = base.augmented_w();
  std::vector<bool> is_support(ds.size(), false);
  for (std::size_t i : base.support_indices) is_support[i] = true;

  StabilityReport rep;
  rep.dataset_seed = ds.seed;
  rep.trainer_fingerprint = "svm";
  rep.per_index.resize(subset.size());
  parallel_for(subset.size(), [&](std::size_t k) {
    std::size_t i = subset[k];
    StabilityEntry e{i, 0.0, false, ""};
    if (is_support[i]) {
      try {
        LabeledDataset loo = leave_one_out(ds, i);
        Vec w = solve_hard_margin(loo).augmented_w();
        e.gap = normalized ? direction_gap(w, base_w) : norm(sub(w, base_w));
      } catch (const DegenerateClassError& ex) {
        e.skipped = true;
        e.reason = ex.what();
      }
    }
    rep.per_index[k] = std::move(e);
  }, jobs);
  rep.aggregate();
  return rep;
}

struct SvmShift {
  std::size_t index;
  double shift;  // ||w_hat(S^i) - w_hat(S)|| in the augmented space
};

// Raw parameter distances between the solution on S and on every S^i; each
// perturbed problem is solved from scratch.
inline std::vector<SvmShift> svm_solution_shift(const LabeledDataset& ds,
                                                unsigned jobs = 0) {
  SvmSolution base = solve_hard_margin(ds);
  Vec base_w = base.augmented_w();
  std::vector<SvmShift> out(ds.size());
  parallel_for(ds.size(), [&](std::size_t i) {
    LabeledDataset loo = leave_one_out(ds, i);
    Vec w = solve_hard_margin(loo).augmented_w();
    out[i] = {i, norm(sub(w, base_w))};
  }, jobs);
  return out;
}

inline StabilityReport data_perturbation_stability(const LabeledDataset& ds,
                                                   double drop_ratio,
                                                   std::size_t n_seeds,
                                                   const Trainer& trainer,
                                                   const std::string& fingerprint = "",
                                                   unsigned jobs = 0) {
  if (!(drop_ratio > 0.0) || drop_ratio >= 1.0)
    throw ParameterError("data_perturbation_stability: drop_ratio must be in (0, 1)");
  Vec base = trainer(ds);
  StabilityReport rep;
  rep.dataset_seed = ds.seed;
  rep.trainer_fingerprint = fingerprint;
  rep.per_index.resize(n_seeds);
  parallel_for(n_seeds, [&](std::size_t k) {
    StabilityEntry e{k, 0.0, false, ""};
    try {
      LabeledDataset sub = subsample(ds, 1.0 - drop_ratio, derive_seed(ds.seed, k + 1));
      Vec w = trainer(sub);
      e.gap = direction_gap(w, base);
    } catch (const DegenerateClassError& ex) {
      e.skipped = true;
      e.reason = ex.what();
    }
    rep.per_index[k] = std::move(e);
  }, jobs);
  rep.aggregate();
  return rep;
}

}  // namespace stablab
