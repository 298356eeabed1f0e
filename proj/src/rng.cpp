#include "taushape/rng.hpp"

#include <cmath>

#include "taushape/errors.hpp"
#include "taushape/special.hpp"

namespace taushape {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  // Expand (seed, stream) into a full engine state via a splitmix chain.
  std::uint64_t s = splitmix64(seed) ^ splitmix64(splitmix64(stream_id));
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                    static_cast<std::uint32_t>(splitmix64(s)),
                    static_cast<std::uint32_t>(splitmix64(s) >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), gen_(make_engine(seed, stream_id)) {}

RngStream RngStream::derive(std::uint64_t child_id) const {
  return RngStream(seed_, splitmix64(stream_id_ ^ splitmix64(child_id + 1)));
}

double RngStream::uniform() {
  // 53-bit mantissa, shifted off zero so inverse CDFs stay finite.
  return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double RngStream::normal() { return norm_quantile(uniform()); }

double RngStream::normal(double mu, double sd) { return mu + sd * normal(); }

bool RngStream::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter("bernoulli: p in [0,1]");
  return uniform() < p;
}

int RngStream::binomial(int n, double p) {
  if (n < 0) throw InvalidParameter("binomial: n >= 0");
  int k = 0;
  for (int i = 0; i < n; ++i) k += bernoulli(p) ? 1 : 0;
  return k;
}

double RngStream::gamma(double shape) {
  if (!(shape > 0.0)) throw InvalidParameter("gamma: shape > 0");
  if (shape < 1.0) {
    // Boost a < 1 via gamma(a+1) * U^{1/a}.
    double u = uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze.
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double RngStream::beta(double a, double b) {
  double x = gamma(a);
  double y = gamma(b);
  return x / (x + y);
}

}  // namespace taushape
