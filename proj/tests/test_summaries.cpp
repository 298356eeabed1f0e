#include <doctest.h>

#include <cmath>
#include <vector>

#include "taushape/errors.hpp"
#include "taushape/rng.hpp"
#include "taushape/summaries.hpp"

using namespace taushape;

TEST_CASE("type-7 quantiles on tiny inputs") {
  CHECK(empirical_quantiles({0, 1}, {0.5}) == std::vector<double>{0.5});
  std::vector<double> q = empirical_quantiles({1, 2, 3, 4, 5}, {0.25, 0.75});
  CHECK(q[0] == doctest::Approx(2.0));
  CHECK(q[1] == doctest::Approx(4.0));
  // order of the input does not matter
  std::vector<double> q2 = empirical_quantiles({5, 3, 1, 4, 2}, {0.25, 0.75});
  CHECK(q2[0] == doctest::Approx(2.0));
}

TEST_CASE("quantile of uniform draws matches the probability") {
  RngStream rng(99, 0);
  std::vector<double> draws(100000);
  for (auto& d : draws) d = rng.uniform();
  std::vector<double> q = empirical_quantiles(draws, {0.9});
  CHECK(std::fabs(q[0] - 0.9) < 0.005);
}

TEST_CASE("quantile input validation") {
  CHECK_THROWS_AS(empirical_quantiles({}, {0.5}), EmptyInput);
  CHECK_THROWS_AS(empirical_quantiles({1.0}, {0.5, 0.5}), InvalidParameter);
  CHECK_THROWS_AS(empirical_quantiles({1.0}, {0.0}), InvalidParameter);
  CHECK_THROWS_AS(empirical_quantiles({1.0}, {0.2, 0.1}), InvalidParameter);
}

TEST_CASE("credible summary equal-tailed quantiles") {
  std::vector<double> draws(100);
  for (int i = 0; i < 100; ++i) draws[i] = i + 1;
  CredibleSummary s = credible_summary(draws, 0.95);
  CHECK(s.median == doctest::Approx(50.5));
  CHECK(s.lo == doctest::Approx(3.475));
  CHECK(s.hi == doctest::Approx(97.525));
  CHECK(s.lo <= s.median);
  CHECK(s.median <= s.hi);
}

TEST_CASE("ks statistic is small for a fine grid") {
  std::vector<double> grid(10000);
  for (int i = 0; i < 10000; ++i) grid[i] = (i + 0.5) / 10000.0;
  CHECK(ks_uniform(grid) < 1e-3);
}
