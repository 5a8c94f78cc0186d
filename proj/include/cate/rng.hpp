#pragma once

#include <cstdint>

namespace cate {

// SplitMix64 stream. Used for all scenario randomness so that generated
// worlds are bit-identical across platforms (std::uniform_real_distribution
// is not portable).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // uniform integer in [0, n)
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
};

// Derives an independent seed for a (cell, trial) slot of a batch.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  SplitMix64 s(base);
  std::uint64_t x = s.next_u64() ^ (a * 0xD6E8FEB86659FD93ull);
  SplitMix64 s2(x);
  x = s2.next_u64() ^ (b * 0xCA5A826395121157ull);
  SplitMix64 s3(x);
  return s3.next_u64() ^ (c * 0x9E3779B97F4A7C15ull);
}

}  // namespace cate
