#pragma once

#include <vector>

namespace taushape {

// Type-7 (linear interpolation) quantiles of draws at each grid probability.
// The grid must be strictly increasing within (0, 1); draws non-empty.
std::vector<double> empirical_quantiles(const std::vector<double>& draws,
                                        const std::vector<double>& grid);

// Median with an equal-tailed credible band at the given level, all type-7
// quantiles of the supplied draws.
struct CredibleSummary {
  double median;
  double lo;
  double hi;
  double level;
};

CredibleSummary credible_summary(const std::vector<double>& draws,
                                 double level = 0.95);

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);  // unbiased

// Kolmogorov-Smirnov statistic of draws against the uniform(0,1) CDF.
double ks_uniform(std::vector<double> draws);

}  // namespace taushape
