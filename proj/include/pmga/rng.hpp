#pragma once

// Seed plumbing. All randomness derives from one root seed; every trajectory,
// episode or quadrature batch gets its own generator seeded from
// (root, stream, index) so results do not depend on scheduling.

#include <cstdint>
#include <random>

namespace pmga {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index, std::uint64_t stream = 0) {
  return splitmix64(splitmix64(root ^ splitmix64(stream)) + index);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t root, std::uint64_t index, std::uint64_t stream = 0) {
  return Rng(derive_seed(root, index, stream));
}

}  // namespace pmga
