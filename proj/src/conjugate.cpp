#include "taushape/conjugate.hpp"

#include <algorithm>
#include <cmath>

#include "taushape/errors.hpp"
#include "taushape/special.hpp"

namespace taushape {

double log_binom_pmf(int k, int n, double p) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  if (p <= 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return k == n ? 0.0 : -std::numeric_limits<double>::infinity();
  double lchoose = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                   std::lgamma(n - k + 1.0);
  return lchoose + k * std::log(p) + (n - k) * std::log1p(-p);
}

double exact_tau_conjugate(int y1, int n1, int y0, int n0, double prior_a,
                           double prior_b) {
  if (y1 < 0 || y1 > n1 || y0 < 0 || y0 > n0)
    throw InvalidParameter("exact_tau_conjugate: need 0 <= y <= n per arm");
  BetaParams post1(prior_a + y1, prior_b + n1 - y1);
  BetaParams post0(prior_a + y0, prior_b + n0 - y0);

  // P(p0 > p1) = E_{t ~ post1}[1 - F0(t)], integrated over the effective
  // support of post1 (tails beyond 1e-12 mass truncated).
  double lo = beta_quantile(1e-12, post1);
  double hi = beta_quantile(1.0 - 1e-12, post1);
  if (!(hi > lo)) {
    double t = post1.mean();
    return 1.0 - reg_inc_beta(t, post0);
  }
  const double log_norm = log_beta(post1.a, post1.b);
  auto f = [&](double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    double pdf = std::exp((post1.a - 1.0) * std::log(t) +
                          (post1.b - 1.0) * std::log1p(-t) - log_norm);
    return pdf * (1.0 - reg_inc_beta(t, post0));
  };
  double v = integrate(f, lo, hi, 1e-10);
  return std::clamp(v, 0.0, 1.0);
}

double ExactTauDistribution::tail_probability(double u) const {
  double p = 0.0;
  for (const auto& atom : atoms)
    if (atom.tau > u) p += atom.prob;
  return p;
}

double ExactTauDistribution::mean() const {
  double m = 0.0;
  for (const auto& atom : atoms) m += atom.tau * atom.prob;
  return m;
}

ExactTauDistribution enumerate_sampling_distribution(int n_per_arm, double p1,
                                                     double p0) {
  if (n_per_arm < 1 || n_per_arm > 200)
    throw InvalidParameter(
        "enumerate_sampling_distribution: n_per_arm must lie in [1, 200]");
  ExactTauDistribution dist;
  dist.atoms.reserve(static_cast<std::size_t>(n_per_arm + 1) * (n_per_arm + 1));
  std::vector<double> pmf1(n_per_arm + 1), pmf0(n_per_arm + 1);
  for (int k = 0; k <= n_per_arm; ++k) {
    pmf1[k] = std::exp(log_binom_pmf(k, n_per_arm, p1));
    pmf0[k] = std::exp(log_binom_pmf(k, n_per_arm, p0));
  }
  for (int y1 = 0; y1 <= n_per_arm; ++y1)
    for (int y0 = 0; y0 <= n_per_arm; ++y0)
      dist.atoms.push_back(
          TauAtom{exact_tau_conjugate(y1, n_per_arm, y0, n_per_arm),
                  pmf1[y1] * pmf0[y0]});
  std::sort(dist.atoms.begin(), dist.atoms.end(),
            [](const TauAtom& a, const TauAtom& b) { return a.tau < b.tau; });
  return dist;
}

double exact_tail_probability(int n_per_arm, double p1, double p0, double u) {
  if (n_per_arm < 1 || n_per_arm > 2000)
    throw InvalidParameter(
        "exact_tail_probability: n_per_arm must lie in [1, 2000]");
  if (!(u > 0.0 && u < 1.0))
    throw InvalidParameter("exact_tail_probability: u must lie in (0,1)");

  const int n = n_per_arm;
  std::vector<double> cdf1(n + 1);
  double acc = 0.0;
  for (int k = 0; k <= n; ++k) {
    acc += std::exp(log_binom_pmf(k, n, p1));
    cdf1[k] = std::min(1.0, acc);
  }

  // tau is decreasing in y1 and increasing in y0, so {tau > u} is
  // {y1 <= cut(y0)} with cut nondecreasing in y0.
  auto crosses = [&](int y1, int y0) {
    return exact_tau_conjugate(y1, n, y0, n) > u;
  };
  double total = 0.0;
  int cut = -1;  // cut(y0 - 1); -1 means no y1 crossed
  for (int y0 = 0; y0 <= n; ++y0) {
    if (cut < 0) {
      if (!crosses(0, y0)) continue;  // still nothing crosses at this y0
      cut = 0;
    }
    // Largest y1 with tau > u, warm-started at the previous cut.
    int lo = cut, hi = n;
    if (crosses(n, y0)) {
      cut = n;
    } else {
      while (lo < hi) {
        int mid = lo + (hi - lo + 1) / 2;
        if (crosses(mid, y0))
          lo = mid;
        else
          hi = mid - 1;
      }
      cut = lo;
    }
    total += std::exp(log_binom_pmf(y0, n, p0)) * cdf1[cut];
  }
  return std::min(1.0, total);
}

}  // namespace taushape
