#include <doctest.h>

#include <cmath>
#include <string>

#include "stablab/bounds.hpp"

using namespace stablab;

TEST_CASE("thm1_rhs reproduces the independently computed reference value") {
  // mpmath, 30 digits: sqrt(2)/ (100 ((1 - 0.5)^{-1/4} - 1))
  CHECK(thm1_rhs(1.0, 1.0, 1.0, 0.5, 100.0) ==
        doctest::Approx(0.074744206228859662).epsilon(1e-14));
  // rounded to four significant figures: 0.07474
  CHECK(std::round(thm1_rhs(1.0, 1.0, 1.0, 0.5, 100.0) * 1e5) / 1e5 ==
        doctest::Approx(0.07474));
}

TEST_CASE("thm1_rhs scaling structure") {
  CHECK(thm1_rhs(0.0, 1.0, 1.0, 0.5, 100.0) == 0.0);
  double base = thm1_rhs(2.0, 3.0, 1.5, 0.75, 50.0);
  // halves when n doubles
  CHECK(thm1_rhs(2.0, 3.0, 1.5, 0.75, 100.0) == doctest::Approx(base / 2.0).epsilon(1e-12));
  // sqrt in L and in w_dist
  CHECK(thm1_rhs(8.0, 3.0, 1.5, 0.75, 50.0) == doctest::Approx(base * 2.0).epsilon(1e-12));
  CHECK(thm1_rhs(2.0, 12.0, 1.5, 0.75, 50.0) == doctest::Approx(base * 2.0).epsilon(1e-12));
}

TEST_CASE("thm2_rhs reproduces the independently computed reference value") {
  // C = 0 isolates the max term; mpmath, 30 digits
  double t = 100.0;
  CHECK(thm2_rhs(0.0, t, 1.0, 1.0, 100.0, 1.0, 1.0) ==
        doctest::Approx(0.205062490237425566).epsilon(1e-14));
}

TEST_CASE("convergence term matches ln ln t / ln t") {
  double t = std::exp(std::exp(1.0));
  CHECK(cor1_rhs(1.0, t, 1.0, 0.0, 1.0, 1.0) ==
        doctest::Approx(0.367879441171442321).epsilon(1e-14));
  CHECK(cor1_rhs(2.5, t, 1.0, 0.0, 1.0, 1.0) ==
        doctest::Approx(2.5 * std::exp(-1.0)).epsilon(1e-14));
  CHECK_THROWS_AS(cor1_rhs(1.0, 2.0, 1.0, 0.0, 1.0, 1.0), std::domain_error);
}

TEST_CASE("cor1_rhs second term is nu L / (lambda n)") {
  // worked example: nu = 1, L = 2, lambda = 1, n = 100 adds 0.02
  double with = cor1_rhs(0.0, 10.0, 1.0, 2.0, 1.0, 100.0);
  CHECK(with == doctest::Approx(0.02).epsilon(1e-14));
  // linear in L
  CHECK(cor1_rhs(0.0, 10.0, 1.0, 4.0, 1.0, 100.0) ==
        doctest::Approx(2.0 * with).epsilon(1e-14));
}

TEST_CASE("thm2 decomposes into the cor1 convergence term plus the shift term") {
  double conv = cor1_rhs(1.3, 50.0, 1.0, 0.0, 1.0, 1.0);
  double shift = thm2_rhs(0.0, 50.0, 0.7, 0.2, 40.0, 1.5, 0.6);
  CHECK(thm2_rhs(1.3, 50.0, 0.7, 0.2, 40.0, 1.5, 0.6) ==
        doctest::Approx(conv + shift).epsilon(1e-14));
}

TEST_CASE("multi-head factor is sqrt((2 + 8 ln(1/delta)) / H)") {
  // delta = e^{-1}: threshold 10, so H = 100 gives the factor sqrt(0.1)
  double delta = std::exp(-1.0);
  double t = 100.0;
  double shift = thm2_rhs(0.0, t, 1.0, 1.0, 100.0, 1.0, 1.0);
  double conv = cor1_rhs(1.0, t, 1.0, 0.0, 1.0, 1.0);
  double full = mh_rhs(1.0, 1.0, t, 100.0, delta, 1.0, 1.0, 100.0, 1.0, 1.0);
  CHECK((full - shift) / conv ==
        doctest::Approx(0.316227766016837933).epsilon(1e-12));
  // xi scales the convergence part only
  double scaled = mh_rhs(1.0, 2.0, t, 100.0, delta, 1.0, 1.0, 100.0, 1.0, 1.0);
  CHECK(scaled - shift == doctest::Approx(2.0 * (full - shift)).epsilon(1e-12));
}

TEST_CASE("multi-head bound enforces the head-count threshold") {
  double delta = std::exp(-1.0);
  // H must strictly exceed 2 + 8 ln(1/delta) = 10
  CHECK_THROWS_AS(mh_rhs(1.0, 1.0, 100.0, 10.0, delta, 1.0, 1.0, 100.0, 1.0, 1.0),
                  std::domain_error);
  try {
    mh_rhs(1.0, 1.0, 100.0, 5.0, delta, 1.0, 1.0, 100.0, 1.0, 1.0);
    CHECK(false);
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("10") != std::string::npos);
  }
  CHECK_NOTHROW(mh_rhs(1.0, 1.0, 100.0, 10.001, delta, 1.0, 1.0, 100.0, 1.0, 1.0));
}

TEST_CASE("domain errors on invalid parameters") {
  CHECK_THROWS_AS(thm1_rhs(1.0, 1.0, 1.0, 1.0, 100.0), std::domain_error);  // mu == beta
  CHECK_THROWS_AS(thm1_rhs(1.0, 1.0, 1.0, 1.5, 100.0), std::domain_error);  // mu > beta
  CHECK_THROWS_AS(thm1_rhs(1.0, 1.0, 1.0, 0.5, 0.0), std::domain_error);
  CHECK_THROWS_AS(thm1_rhs(-1.0, 1.0, 1.0, 0.5, 10.0), std::domain_error);
  CHECK_THROWS_AS(thm2_rhs(1.0, 2.9, 1.0, 1.0, 10.0, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(thm2_rhs(1.0, 10.0, 1.0, 0.0, 10.0, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(thm2_rhs(1.0, 10.0, 1.0, 1.0, 10.0, 1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(mh_rhs(1.0, 1.0, 10.0, 100.0, 0.0, 1.0, 1.0, 10.0, 1.0, 1.0),
                  std::domain_error);
  CHECK_THROWS_AS(mh_rhs(1.0, 1.0, 10.0, 100.0, 1.0, 1.0, 1.0, 10.0, 1.0, 1.0),
                  std::domain_error);
}

TEST_CASE("monotonicity grids") {
  // thm1: decreasing in n, increasing in L and w_dist
  for (double n : {10.0, 20.0, 40.0})
    CHECK(thm1_rhs(1.0, 1.0, 1.0, 0.5, 2.0 * n) < thm1_rhs(1.0, 1.0, 1.0, 0.5, n));
  for (double L : {0.5, 1.0, 2.0})
    CHECK(thm1_rhs(2.0 * L, 1.0, 1.0, 0.5, 10.0) > thm1_rhs(L, 1.0, 1.0, 0.5, 10.0));
  for (double w : {0.5, 1.0, 2.0})
    CHECK(thm1_rhs(1.0, 2.0 * w, 1.0, 0.5, 10.0) > thm1_rhs(1.0, w, 1.0, 0.5, 10.0));

  // thm2: decreasing in n, t, gamma; increasing in B
  for (double n : {10.0, 50.0, 250.0})
    CHECK(thm2_rhs(1.0, 50.0, 1.0, 1.0, 2.0 * n, 1.0, 1.0) <
          thm2_rhs(1.0, 50.0, 1.0, 1.0, n, 1.0, 1.0));
  for (double t : {10.0, 100.0, 1000.0})
    CHECK(thm2_rhs(1.0, 10.0 * t, 1.0, 1.0, 50.0, 1.0, 1.0) <
          thm2_rhs(1.0, t, 1.0, 1.0, 50.0, 1.0, 1.0));
  for (double g : {0.2, 0.5, 1.0})
    CHECK(thm2_rhs(1.0, 50.0, 1.0, 1.0, 50.0, 1.0, 2.0 * g) <
          thm2_rhs(1.0, 50.0, 1.0, 1.0, 50.0, 1.0, g));
  for (double B : {0.5, 1.0, 2.0})
    CHECK(thm2_rhs(1.0, 50.0, 1.0, 1.0, 50.0, 2.0 * B, 1.0) >
          thm2_rhs(1.0, 50.0, 1.0, 1.0, 50.0, B, 1.0));

  // multi-head: decreasing in H
  double delta = 0.1;
  double prev = 1e300;
  for (double H : {25.0, 50.0, 100.0, 200.0}) {
    double v = mh_rhs(1.0, 1.0, 50.0, H, delta, 1.0, 1.0, 50.0, 1.0, 1.0);
    CHECK(v < prev);
    prev = v;
  }
}
