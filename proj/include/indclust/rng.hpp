// Fixed, portable pseudo-randomness. All generated data flows from a single
// 64-bit seed through SplitMix64 streams so runs are byte-identical across
// platforms; standard-library distributions are avoided on purpose (their
// outputs are implementation-defined).
#pragma once

#include <cmath>
#include <cstdint>

namespace indclust {

// SplitMix64 (Steele, Lea, Flood 2014). One stream per series; streams are
// derived from (seed, stream_id) below.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Unbiased uniform integer in [0, bound), bound >= 1 (rejection sampling).
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % bound;
  }

  bool next_bit() { return (next() >> 63) != 0; }

  // Standard normal via Box-Muller; draws two uniforms per variate so the
  // stream position is input-independent.
  double next_gaussian() {
    const double u1 = 1.0 - next_double();  // (0, 1]
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::uint64_t state_;
};

// Decorrelated per-stream generator: the same master seed with different
// stream ids yields independent-looking sequences.
inline SplitMix64 derive_stream(std::uint64_t seed, std::uint64_t stream_id) {
  SplitMix64 scramble(seed);
  const std::uint64_t base = scramble.next();
  return SplitMix64(base ^ (0xD1342543DE82EF95ULL * (stream_id + 1)));
}

}  // namespace indclust
