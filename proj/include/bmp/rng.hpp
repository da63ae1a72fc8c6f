#pragma once

#include <cstdint>

namespace bmp {

// Derives a decorrelated child seed from (seed, salt). All randomness in the
// library flows from one user seed through this function, so runs are
// reproducible: fit iteration k uses mix_seed(seed, k), retry r within an
// iteration uses mix_seed(iter_seed, r + 1), partition i inside the greedy
// search uses mix_seed(retry_seed, i + 1). splitmix64 finalizer.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

}  // namespace bmp
