#pragma once

#include <cstdint>

namespace steinlab {

// Counter-based generator built on the SplitMix64 finalizer.
//
//   mix(z):   z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//             z ^= z >> 27; z *= 0x94D049BB133111EB;
//             z ^= z >> 31
//   key     = mix(mix(seed) + (stream + 1) * G),   G = 0x9E3779B97F4A7C15
//   bits(c) = mix(key + (c + 1) * G)
//   uniform(c) = (bits(c) >> 11) * 2^-53           in [0, 1)
//
// bits(0), bits(1), ... is exactly the SplitMix64 output stream seeded with
// `key`, so any implementation of SplitMix64 reproduces it. All arithmetic
// is modulo 2^64.

inline constexpr std::uint64_t kSplitMixGamma = 0x9E3779B97F4A7C15ULL;

[[nodiscard]] constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  constexpr explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_(splitmix64_mix(splitmix64_mix(seed) + (stream + 1) * kSplitMixGamma)) {}

  [[nodiscard]] constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return splitmix64_mix(key_ + (counter + 1) * kSplitMixGamma);
  }

  [[nodiscard]] constexpr double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
};

}  // namespace steinlab
