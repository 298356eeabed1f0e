#include <doctest.h>

#include <cmath>

#include "taushape/conjugate.hpp"
#include "taushape/errors.hpp"
#include "taushape/rng.hpp"

using namespace taushape;

TEST_CASE("exchangeable outcomes give tau = 1/2") {
  CHECK(exact_tau_conjugate(3, 10, 3, 10) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(exact_tau_conjugate(0, 4, 0, 4) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("closed-form double integral") {
  // y1=0,n1=1 / y0=1,n0=1: P(Beta(2,1) > Beta(1,2)) = 5/6
  CHECK(exact_tau_conjugate(0, 1, 1, 1) ==
        doctest::Approx(5.0 / 6.0).epsilon(1e-8));
}

TEST_CASE("monte carlo oracle at 1e7 draws") {
  double exact = exact_tau_conjugate(3, 10, 7, 10);
  RngStream rng(2024, 0);
  const long n = 10000000;
  long hits = 0;
  for (long i = 0; i < n; ++i) {
    double p1 = rng.beta(4, 8);   // 1 + y1, 1 + n1 - y1
    double p0 = rng.beta(8, 4);
    if (p0 > p1) ++hits;
  }
  double mc = static_cast<double>(hits) / n;
  CHECK(std::fabs(exact - mc) < 3e-4);
}

TEST_CASE("tau is monotone in each arm's events") {
  double prev = 1.0;
  for (int y1 = 0; y1 <= 12; ++y1) {
    double t = exact_tau_conjugate(y1, 12, 5, 12);
    CHECK(t < prev);
    prev = t;
  }
  prev = 0.0;
  for (int y0 = 0; y0 <= 12; ++y0) {
    double t = exact_tau_conjugate(4, 12, y0, 12);
    CHECK(t > prev);
    prev = t;
  }
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(exact_tau_conjugate(-1, 5, 0, 5), InvalidParameter);
  CHECK_THROWS_AS(exact_tau_conjugate(6, 5, 0, 5), InvalidParameter);
  CHECK_THROWS_AS(enumerate_sampling_distribution(0, 0.5, 0.5),
                  InvalidParameter);
  CHECK_THROWS_AS(enumerate_sampling_distribution(500, 0.5, 0.5),
                  InvalidParameter);
}

TEST_CASE("single-subject enumeration lists the four outcomes") {
  ExactTauDistribution d = enumerate_sampling_distribution(1, 0.5, 0.5);
  REQUIRE(d.atoms.size() == 4);
  for (const auto& atom : d.atoms) CHECK(atom.prob == doctest::Approx(0.25));
  // outcome taus, sorted: (y1=1,y0=0) -> 1/6, two ties at 1/2, (0,1) -> 5/6
  CHECK(d.atoms[0].tau == doctest::Approx(exact_tau_conjugate(1, 1, 0, 1)));
  CHECK(d.atoms[1].tau == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(d.atoms[2].tau == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(d.atoms[3].tau == doctest::Approx(exact_tau_conjugate(0, 1, 1, 1)));
  CHECK(d.atoms[0].tau == doctest::Approx(1.0 / 6.0).epsilon(1e-8));
}

TEST_CASE("tail probability vanishes as u -> 1 under the null") {
  ExactTauDistribution d = enumerate_sampling_distribution(15, 0.4, 0.4);
  CHECK(d.tail_probability(0.999999) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(d.tail_probability(0.5) > 0.1);
  CHECK(d.mean() == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("fast exact tail agrees with full enumeration") {
  for (double u : {0.9, 0.975}) {
    double full = enumerate_sampling_distribution(25, 0.2, 0.3).tail_probability(u);
    double fast = exact_tail_probability(25, 0.2, 0.3, u);
    CHECK(fast == doctest::Approx(full).epsilon(1e-12));
  }
  double full = enumerate_sampling_distribution(40, 0.3, 0.3).tail_probability(0.975);
  CHECK(exact_tail_probability(40, 0.3, 0.3, 0.975) ==
        doctest::Approx(full).epsilon(1e-12));
}

TEST_CASE("log binomial pmf sums to one") {
  double s = 0.0;
  for (int k = 0; k <= 30; ++k) s += std::exp(log_binom_pmf(k, 30, 0.37));
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
}
