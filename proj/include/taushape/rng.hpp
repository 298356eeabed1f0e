#pragma once

#include <cstdint>
#include <random>

namespace taushape {

// Deterministic random stream addressed by (seed, stream_id). The same pair
// always reproduces the same draw sequence; distinct stream ids give
// statistically independent streams. All distribution transforms are
// implemented here (not via std::*_distribution) so sequences are identical
// across standard libraries.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  // Independent child stream; derive(i) != derive(j) for i != j.
  RngStream derive(std::uint64_t child_id) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on (0, 1) (both ends excluded; safe for inverse-CDF transforms).
  double uniform();
  double uniform(double lo, double hi);
  double normal();
  double normal(double mu, double sd);
  bool bernoulli(double p);
  int binomial(int n, double p);
  double gamma(double shape);  // unit scale
  double beta(double a, double b);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 gen_;
};

}  // namespace taushape
