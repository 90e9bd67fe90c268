#include "witnesskit/rng.hpp"

namespace wkit {

namespace {

inline uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(uint64_t seed, uint64_t stream_id) {
  uint64_t sm = seed;
  uint64_t mixed = splitmix64(sm) ^ (0x9E3779B97F4A7C15ULL * (stream_id + 1));
  for (int i = 0; i < 4; ++i) s_[i] = splitmix64(mixed);
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // all-zero state is invalid
}

uint64_t Rng::next() {
  const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

int Rng::pick(const std::vector<double>& probabilities) {
  const double u = uniform();
  double acc = 0.0;
  const int last = static_cast<int>(probabilities.size()) - 1;
  for (int i = 0; i < last; ++i) {
    acc += probabilities[i];
    if (u < acc) return i;
  }
  return last;
}

}  // namespace wkit
