#include "taushape/summaries.hpp"

#include <algorithm>
#include <cmath>

#include "taushape/errors.hpp"

namespace taushape {

namespace {

double quantile_sorted(const std::vector<double>& s, double p) {
  double h = (static_cast<double>(s.size()) - 1.0) * p;
  std::size_t i = static_cast<std::size_t>(h);
  if (i + 1 >= s.size()) return s.back();
  double frac = h - static_cast<double>(i);
  return s[i] + frac * (s[i + 1] - s[i]);
}

}  // namespace

std::vector<double> empirical_quantiles(const std::vector<double>& draws,
                                        const std::vector<double>& grid) {
  if (draws.empty()) throw EmptyInput("empirical_quantiles: no draws");
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (!(grid[j] > 0.0 && grid[j] < 1.0))
      throw InvalidParameter("quantile grid must lie in (0,1)");
    if (j > 0 && !(grid[j] > grid[j - 1]))
      throw InvalidParameter("quantile grid must be strictly increasing");
  }
  std::vector<double> s(draws);
  std::sort(s.begin(), s.end());
  std::vector<double> out(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j)
    out[j] = quantile_sorted(s, grid[j]);
  return out;
}

CredibleSummary credible_summary(const std::vector<double>& draws,
                                 double level) {
  if (draws.empty()) throw EmptyInput("credible_summary: no draws");
  if (!(level > 0.0 && level < 1.0))
    throw InvalidParameter("credible level must lie in (0,1)");
  std::vector<double> s(draws);
  std::sort(s.begin(), s.end());
  double tail = 0.5 * (1.0 - level);
  return CredibleSummary{quantile_sorted(s, 0.5), quantile_sorted(s, tail),
                         quantile_sorted(s, 1.0 - tail), level};
}

double mean(const std::vector<double>& v) {
  if (v.empty()) throw EmptyInput("mean: no values");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
  if (v.size() < 2) throw EmptyInput("variance: need >= 2 values");
  double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double ks_uniform(std::vector<double> draws) {
  if (draws.empty()) throw EmptyInput("ks_uniform: no draws");
  std::sort(draws.begin(), draws.end());
  double n = static_cast<double>(draws.size());
  double d = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    double lo = static_cast<double>(i) / n;
    double hi = static_cast<double>(i + 1) / n;
    d = std::max(d, std::max(std::fabs(draws[i] - lo), std::fabs(draws[i] - hi)));
  }
  return d;
}

}  // namespace taushape
