#include <doctest.h>

#include <cmath>

#include "stablab/dataset.hpp"
#include "stablab/svm.hpp"
#include "svm_oracle_ref.hpp"

using namespace stablab;

namespace {

LabeledDataset random_separable(std::uint64_t seed, std::size_t n) {
  DatasetSpec s;
  s.n = n;
  s.d = 2;
  s.center_distance_half = 1.0;
  s.cluster_radius = 0.6;
  s.bound_B = 1.6;
  s.seed = seed;
  return generate_dataset(s);
}

}  // namespace

TEST_CASE("axis-aligned two-point problem has the textbook solution") {
  LabeledDataset ds;
  ds.features = {{1.0, 0.0}, {-1.0, 0.0}};
  ds.labels = {1, -1};
  auto sol = solve_hard_margin(ds);
  CHECK(sol.v_hat[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sol.v_hat[1] == doctest::Approx(0.0));
  CHECK(sol.b_hat == doctest::Approx(0.0));
  CHECK(sol.gamma == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sol.support_indices.size() == 2);
  CHECK(margin(sol) == doctest::Approx(sol.gamma));
  Vec aw = sol.augmented_w();
  CHECK(aw.size() == 3);
  CHECK(aw[2] == doctest::Approx(sol.b_hat));
}

TEST_CASE("degenerate inputs raise the documented errors") {
  LabeledDataset one_class;
  one_class.features = {{1.0}, {2.0}};
  one_class.labels = {1, 1};
  CHECK_THROWS_AS(solve_hard_margin(one_class), DegenerateClassError);

  LabeledDataset coincident;
  coincident.features = {{1.0, 1.0}, {1.0, 1.0}};
  coincident.labels = {1, -1};
  CHECK_THROWS_AS(solve_hard_margin(coincident), InfeasibleError);

  LabeledDataset empty;
  CHECK_THROWS_AS(solve_hard_margin(empty), ShapeError);
}

TEST_CASE("solver matches the enumeration oracle on random sets") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto ds = random_separable(seed, 8 + seed % 23);
    auto sol = solve_hard_margin(ds);
    auto oracle = svm_ref::enumerate_hard_margin(ds);
    REQUIRE(oracle.has_value());
    double ours = dot(sol.v_hat, sol.v_hat);
    double ref = dot(oracle->v, oracle->v);
    CHECK(ours == doctest::Approx(ref).epsilon(1e-6));
    CHECK(sol.b_hat == doctest::Approx(oracle->b).epsilon(1e-4));
    CHECK(sol.kkt_residual <= 1e-8);
    // |b| <= 1 + ||v|| B
    CHECK(std::abs(sol.b_hat) <= 1.0 + norm(sol.v_hat) * 1.6 + 1e-9);
  }
}

TEST_CASE("kkt_report recomputes a consistent certificate") {
  auto ds = random_separable(77, 30);
  auto sol = solve_hard_margin(ds);
  auto rep = kkt_report(sol, ds);
  CHECK(rep.max_violation <= 1e-8);
  CHECK(rep.reconstruction_error <= 1e-10);
  CHECK(rep.dual_balance <= 1e-10);
  CHECK(rep.support_pos >= 1);
  CHECK(rep.support_neg >= 1);
  LabeledDataset wrong = leave_one_out(ds, 0);
  CHECK_THROWS_AS(kkt_report(sol, wrong), ShapeError);
}

TEST_CASE("duplicating every sample leaves the solution unchanged") {
  auto ds = random_separable(5, 15);
  LabeledDataset doubled = ds;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    doubled.features.push_back(ds.features[i]);
    doubled.labels.push_back(ds.labels[i]);
  }
  auto a = solve_hard_margin(ds);
  auto b = solve_hard_margin(doubled);
  CHECK(direction_gap(a.augmented_w(), b.augmented_w()) <= 1e-7);
  CHECK(a.gamma == doctest::Approx(b.gamma).epsilon(1e-8));
}

TEST_CASE("removing a strict non-support vector preserves the optimum") {
  auto ds = random_separable(9, 40);
  auto sol = solve_hard_margin(ds);
  std::vector<bool> is_support(ds.size(), false);
  for (auto i : sol.support_indices) is_support[i] = true;
  int checked = 0;
  for (std::size_t i = 0; i < ds.size() && checked < 5; ++i) {
    if (is_support[i]) continue;
    auto loo = solve_hard_margin(leave_one_out(ds, i));
    CHECK(direction_gap(loo.augmented_w(), sol.augmented_w()) <= 1e-7);
    ++checked;
  }
  CHECK(checked == 5);
}

TEST_CASE("solver is deterministic") {
  auto ds = random_separable(33, 25);
  auto a = solve_hard_margin(ds);
  auto b = solve_hard_margin(ds);
  CHECK(a.v_hat == b.v_hat);
  CHECK(a.b_hat == b.b_hat);
  CHECK(a.dual_values == b.dual_values);
}
