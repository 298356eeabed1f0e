#pragma once

#include <vector>

namespace taushape {

// tau = P(p0 > p1 | y) for independent beta posteriors
// p1 ~ Beta(prior_a + y1, prior_b + n1 - y1), p0 likewise, via adaptive
// quadrature of the posterior-density product. Absolute error <= 1e-8.
double exact_tau_conjugate(int y1, int n1, int y0, int n0,
                           double prior_a = 1.0, double prior_b = 1.0);

struct TauAtom {
  double tau;
  double prob;
};

// Exact sampling distribution of tau for the two-arm beta-binomial model
// with fixed n per arm: all (n+1)^2 outcome pairs.
struct ExactTauDistribution {
  std::vector<TauAtom> atoms;  // sorted by tau
  double tail_probability(double u) const;  // exact P(tau > u)
  double mean() const;
};

ExactTauDistribution enumerate_sampling_distribution(int n_per_arm, double p1,
                                                     double p0);

// Exact P(tau > u) without materializing atoms: tau is decreasing in y1 and
// increasing in y0, so each control outcome needs only a binary search over
// intervention outcomes. Valid for n_per_arm up to 2000.
double exact_tail_probability(int n_per_arm, double p1, double p0, double u);

// log P(Y = k), Y ~ Binomial(n, p).
double log_binom_pmf(int k, int n, double p);

}  // namespace taushape
