#pragma once

#include <cstdint>

namespace hpcfe {

// Counter-based generator: the value at (seed, stream, counter) is the
// SplitMix64 finalizer applied to a Weyl sequence position, so any draw can be
// recomputed without replaying the ones before it.
class CounterRng {
public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t bits(std::uint64_t counter) const {
    std::uint64_t z = seed_ + kGolden * (mix(stream_ + 0x632be59bd9b4e019ULL) + counter + 1);
    return mix(z);
  }

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform(std::uint64_t counter) const {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller on counters 2k and 2k+1.
  double normal(std::uint64_t index) const;

private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace hpcfe
