#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace gece {

// Portable pseudo-random source. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; every distribution below is computed here
// rather than through <random> distributions, whose algorithms vary between
// standard library vendors.
//
// Streams: Rng(seed, a, b) seeds the engine with
// std::seed_seq{seed_lo, seed_hi, a_lo, a_hi, b_lo, b_hi}. Analysis routines
// use (a, b) = (grid index, resample index), so each resample is reproducible
// regardless of how resamples are scheduled across threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream_a = 0, std::uint64_t stream_b = 0);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform in (0, 1); never returns zero.
  double uniform_open();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  double normal();
  /// Marsaglia-Tsang; shape > 0, unit scale.
  double gamma(double shape);
  bool bernoulli(double p) { return uniform() < p; }
  /// Index drawn with probability proportional to weights (assumed to sum to ~1).
  std::size_t categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace gece
