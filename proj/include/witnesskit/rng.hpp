#pragma once

#include <cstdint>
#include <vector>

namespace wkit {

// xoshiro256++ (Blackman & Vigna), seeded through SplitMix64.
//
// Stream semantics: stream(seed, id) derives an independent generator for each
// (seed, id) pair by folding the stream id into the SplitMix64 state before
// the xoshiro state words are drawn. Monte Carlo repetition r always uses
// stream(master_seed, r), so results are reproducible for any thread count.
class Rng {
 public:
  explicit Rng(uint64_t seed) : Rng(seed, 0) {}
  static Rng stream(uint64_t seed, uint64_t stream_id) { return Rng(seed, stream_id); }

  uint64_t next();

  // Uniform double in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // true/false with equal probability
  bool coin() { return (next() >> 63) != 0; }

  // Index into a normalized probability vector by inverse CDF.
  int pick(const std::vector<double>& probabilities);

 private:
  Rng(uint64_t seed, uint64_t stream_id);
  uint64_t s_[4];
};

}  // namespace wkit
