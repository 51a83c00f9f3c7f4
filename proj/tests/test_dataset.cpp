#include <doctest.h>

#include <cmath>
#include <sstream>

#include "stablab/dataset.hpp"

using namespace stablab;

namespace {
DatasetSpec demo_spec(std::size_t n = 50, std::size_t d = 2, std::uint64_t seed = 3) {
  DatasetSpec s;
  s.n = n;
  s.d = d;
  s.center_distance_half = 1.0;
  s.cluster_radius = 0.4;
  s.bound_B = 1.4;
  s.seed = seed;
  return s;
}
}  // namespace

TEST_CASE("spec validation rejects bad geometry") {
  CHECK_THROWS_AS(generate_dataset([] { auto s = demo_spec(); s.n = 1; return s; }()),
                  ParameterError);
  CHECK_THROWS_AS(
      generate_dataset([] { auto s = demo_spec(); s.cluster_radius = 1.5; return s; }()),
      ParameterError);
  CHECK_THROWS_AS(
      generate_dataset([] { auto s = demo_spec(); s.bound_B = 1.0; return s; }()),
      ParameterError);
  CHECK_THROWS_AS(generate_dataset([] { auto s = demo_spec(); s.d = 0; return s; }()),
                  ParameterError);
}

TEST_CASE("generated data respects count, balance, bound, and margin") {
  auto spec = demo_spec(101, 3, 11);
  auto ds = generate_dataset(spec);
  CHECK(ds.size() == 101);
  CHECK(ds.dim() == 3);
  CHECK(ds.class_count(1) == 51);
  CHECK(ds.class_count(-1) == 50);
  for (std::size_t i = 0; i < ds.size(); ++i)
    CHECK(norm(ds.features[i]) <= spec.bound_B + 1e-12);
  // every prefix stays balanced to within one sample
  int bal = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    bal += ds.labels[i];
    CHECK(std::abs(bal) <= 1);
  }
}

TEST_CASE("generation is separable by construction") {
  auto spec = demo_spec(200, 2, 17);
  auto ds = generate_dataset(spec);
  // recover the seeded direction from the class centers
  auto [mp, mm] = class_centers(ds, Encoder::identity());
  Vec u = normalized(sub(mp, mm));
  double construction_margin = spec.center_distance_half - spec.cluster_radius;
  for (std::size_t i = 0; i < ds.size(); ++i)
    CHECK(ds.labels[i] * dot(u, ds.features[i]) > 0.5 * construction_margin);
}

TEST_CASE("generation is bit-deterministic") {
  auto a = generate_dataset(demo_spec(64, 4, 99));
  auto b = generate_dataset(demo_spec(64, 4, 99));
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  auto c = generate_dataset(demo_spec(64, 4, 100));
  CHECK(a.features != c.features);
}

TEST_CASE("leave_one_out removes exactly one sample") {
  auto ds = generate_dataset(demo_spec(10));
  auto loo = leave_one_out(ds, 3);
  CHECK(loo.size() == 9);
  CHECK(loo.features[3] == ds.features[4]);
  CHECK_THROWS_AS(leave_one_out(ds, 10), std::out_of_range);
}

TEST_CASE("leave_one_out refuses to empty a class") {
  LabeledDataset ds;
  ds.features = {{1.0}, {-1.0}, {-2.0}};
  ds.labels = {1, -1, -1};
  CHECK_THROWS_AS(leave_one_out(ds, 0), DegenerateClassError);
  CHECK_NOTHROW(leave_one_out(ds, 1));
}

TEST_CASE("subsample keeps a seeded sorted subset") {
  auto ds = generate_dataset(demo_spec(40));
  auto sub40 = subsample(ds, 1.0, 5);
  CHECK(sub40.size() == 40);
  auto half = subsample(ds, 0.5, 5);
  CHECK(half.size() == 20);
  auto half2 = subsample(ds, 0.5, 5);
  CHECK(half.features == half2.features);
  CHECK(subsample(ds, 0.5, 6).features != half.features);
  CHECK_THROWS_AS(subsample(ds, 0.0, 1), ParameterError);
  CHECK_THROWS_AS(subsample(ds, 1.5, 1), ParameterError);
}

TEST_CASE("subsample reports an emptied class") {
  LabeledDataset ds;
  for (int i = 0; i < 20; ++i) {
    ds.features.push_back({static_cast<double>(i)});
    ds.labels.push_back(i == 0 ? 1 : -1);
  }
  bool threw = false;
  for (std::uint64_t s = 0; s < 50 && !threw; ++s) {
    try {
      subsample(ds, 0.5, s);
    } catch (const DegenerateClassError&) {
      threw = true;
    }
  }
  CHECK(threw);
}

TEST_CASE("encoder identity and affine behave") {
  Encoder id = Encoder::identity();
  Vec x{1.0, 2.0};
  CHECK(id.encode(x) == x);
  CHECK(id.out_dim(2) == 2);

  Encoder aff({{1.0, 1.0}, {0.0, 2.0}, {1.0, 0.0}}, {0.5, 0.0, -1.0});
  Vec e = aff.encode(x);
  CHECK(e.size() == 3);
  CHECK(e[0] == doctest::Approx(3.5));
  CHECK(e[1] == doctest::Approx(4.0));
  CHECK(e[2] == doctest::Approx(0.0));
  CHECK(aff.out_dim(2) == 3);
  CHECK_THROWS_AS(aff.encode(Vec{1.0}), ShapeError);
  CHECK_THROWS_AS(Encoder({{1.0, 1.0}}, Vec{1.0, 2.0}), ShapeError);

  Encoder sc = Encoder::scaled_identity(2, 3.0);
  CHECK(sc.encode(x)[1] == doctest::Approx(6.0));
}

TEST_CASE("augment appends the intercept coordinate") {
  auto ds = generate_dataset(demo_spec(6));
  auto aug = augment(ds, Encoder::identity());
  CHECK(aug.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(aug[i].size() == 3);
    CHECK(aug[i].back() == -1.0);
  }
}

TEST_CASE("class_centers match a manual computation") {
  LabeledDataset ds;
  ds.features = {{2.0, 0.0}, {4.0, 2.0}, {-1.0, -1.0}};
  ds.labels = {1, 1, -1};
  auto [mp, mm] = class_centers(ds, Encoder::identity());
  CHECK(mp[0] == doctest::Approx(3.0));
  CHECK(mp[1] == doctest::Approx(1.0));
  CHECK(mm[0] == doctest::Approx(-1.0));
  LabeledDataset one;
  one.features = {{1.0}};
  one.labels = {1};
  CHECK_THROWS_AS(class_centers(one, Encoder::identity()), DegenerateClassError);
}

TEST_CASE("CSV round trip is lossless") {
  auto ds = generate_dataset(demo_spec(25, 3, 123));
  std::stringstream ss;
  write_csv(ds, ss);
  auto back = read_csv(ss);
  CHECK(back.features == ds.features);
  CHECK(back.labels == ds.labels);
}

TEST_CASE("CSV reader rejects malformed input") {
  std::stringstream no_header("");
  CHECK_THROWS_AS(read_csv(no_header), FormatError);
  std::stringstream bad_header("f0,f1,value\n1,2,1\n");
  CHECK_THROWS_AS(read_csv(bad_header), FormatError);
  std::stringstream bad_label("f0,label\n1.0,2\n0.5,-1\n");
  CHECK_THROWS_AS(read_csv(bad_label), FormatError);
  std::stringstream short_row("f0,f1,label\n1.0\n");
  CHECK_THROWS_AS(read_csv(short_row), FormatError);
  std::stringstream too_small("f0,label\n1.0,1\n");
  CHECK_THROWS_AS(read_csv(too_small), FormatError);
}

TEST_CASE("format_g17 round-trips doubles") {
  for (double v : {0.1, 1.0 / 3.0, 1e-17, -123.456e78}) {
    CHECK(std::stod(format_g17(v)) == v);
  }
}
