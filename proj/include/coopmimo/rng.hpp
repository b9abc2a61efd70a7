#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace coopmimo {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based seed derivation: the seed of (stream, index) depends only on
// the master seed and the counters, never on how many draws happened before.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(master ^ splitmix64(stream + 0x632BE59BD9B4E019ULL)) + index);
}

// Named streams so that drops, channels and measurements never share draws.
namespace stream {
inline constexpr std::uint64_t kDrop = 1;
inline constexpr std::uint64_t kChannel = 2;
inline constexpr std::uint64_t kSilent = 3;
inline constexpr std::uint64_t kSymbolError = 4;
inline constexpr std::uint64_t kPlant = 5;
inline constexpr std::uint64_t kLearn = 6;
inline constexpr std::uint64_t kValidate = 7;
}  // namespace stream

// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
inline std::complex<double> complex_normal(Rng& rng, double variance) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

}  // namespace coopmimo
