#pragma once

// Seed derivation and portable draws. The standard distributions are
// implementation-defined, so uniforms and indices are derived from the raw
// 64-bit engine output to keep streams identical across standard libraries.

#include <cstdint>
#include <random>

namespace hcmix {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Independent stream for one replicate of a master seed.
inline Engine replicate_engine(std::uint64_t master_seed, std::uint64_t replicate) {
  return Engine(splitmix64(splitmix64(master_seed) ^ splitmix64(replicate + 0x632BE59BD9B4E019ull)));
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Uniform on {0, .., n-1} (Lemire's multiply-shift with rejection).
inline std::uint64_t uniform_index(Engine& eng, std::uint64_t n) {
  unsigned __int128 m = static_cast<unsigned __int128>(eng()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(eng()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

inline bool fair_coin(Engine& eng) { return (eng() >> 63) != 0; }

}  // namespace hcmix
