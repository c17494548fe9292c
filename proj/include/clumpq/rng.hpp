#pragma once

#include <cstdint>

namespace clumpq {

// Counter-based generator (splitmix64 core). A stream's draws are a pure
// function of (master seed, stream id), so replicate r reproduces in
// isolation and thread partitioning cannot change what anyone draws.
class CounterRng {
 public:
  CounterRng(std::uint64_t master, std::uint64_t stream)
      : state_(mix(master ^ mix(stream ^ 0x6A09E667F3BCC909ULL))) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
  }

  std::uint64_t state_;
};

}  // namespace clumpq
