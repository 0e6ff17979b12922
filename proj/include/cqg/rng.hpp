#pragma once

#include <cstdint>

namespace cqg {

/// Counter-based generator: draw k of stream s under seed is
/// mix(seed, s, k), so any draw is reproducible without replaying the
/// sequence. Output is identical on every platform.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  std::uint64_t next() { return mix(seed_, stream_, counter_++); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, bound).
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }

  std::uint64_t counter() const { return counter_; }
  CounterRng substream(std::uint64_t stream) const {
    return CounterRng(seed_, stream_ * 0x9E3779B97F4A7C15ULL + stream + 1);
  }

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    std::uint64_t z = seed ^ (stream * 0xD1B54A32D192ED03ULL);
    z += (counter + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace cqg
