#pragma once

#include <cstdint>
#include <random>

namespace gbe {

/// Uniform draw in [0, 1) from the top 53 bits of a 64-bit Mersenne twister.
/// std::uniform_real_distribution is implementation-defined; this is not, so
/// seeded instances are identical across standard libraries.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Uniform integer in [0, n).
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  return static_cast<std::uint64_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

}  // namespace gbe
