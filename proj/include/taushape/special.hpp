#pragma once

#include <functional>
#include <vector>

#include "taushape/errors.hpp"

namespace taushape {

// Shape parameters of a beta distribution. Both must be positive and finite.
// Values up to 1e12 are representable without loss; tail probabilities for
// shapes beyond ~1e6 are computed through a moment-matched normal
// approximation (see reg_inc_beta).
struct BetaParams {
  double a;
  double b;

  BetaParams(double a_, double b_) : a(a_), b(b_) { validate(); }
  void validate() const;

  double mean() const { return a / (a + b); }
  double variance() const {
    double s = a + b;
    return a * b / (s * s * (s + 1.0));
  }
};

// log Gamma(x), x > 0. Thin wrapper so callers share one implementation.
double log_gamma(double x);

// log B(a, b) = lgamma(a) + lgamma(b) - lgamma(a+b).
double log_beta(double a, double b);

// Log density of beta(a, b) at x in (0, 1).
double log_beta_pdf(double x, const BetaParams& p);

// Regularized incomplete beta I_x(a, b). Continued fraction with the
// symmetry switch at x > (a+1)/(a+b+2); for max(a,b) > 1e6 a moment-matched
// normal approximation (abs error <= 1e-6 there, <= 1e-12 otherwise).
double reg_inc_beta(double x, const BetaParams& p);

// Inverse of reg_inc_beta in x: the prob-quantile of beta(a, b).
// Newton iteration with a bisection fallback; |I(y) - prob| <= 1e-10.
double beta_quantile(double prob, const BetaParams& p);

// Standard normal CDF and its inverse.
double norm_cdf(double z);
double norm_quantile(double p);
double log_norm_pdf(double x, double mu, double sd);

// Adaptive Simpson quadrature of f on [lo, hi] to absolute tolerance tol.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double tol);

// Gauss-Hermite nodes/weights for integrals of g against the standard normal
// density: E[g(Z)] ~= sum_i weight[i] * g(node[i]).
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
  explicit GaussHermite(int n);

  template <typename G>
  double expect(G&& g, double mu, double sd) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      s += weights[i] * g(mu + sd * nodes[i]);
    return s;
  }
};

}  // namespace taushape
