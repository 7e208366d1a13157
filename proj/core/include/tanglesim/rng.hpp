#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace tanglesim {

using Rng = std::mt19937_64;

// SplitMix64 step, used to spread a master seed into well-separated streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic per-task seed for task (a, b) of a run seeded with `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0) {
  std::uint64_t s = master;
  std::uint64_t out = splitmix64(s);
  s ^= (a + 1) * 0x9e3779b97f4a7c15ull;
  out ^= splitmix64(s);
  s ^= (b + 1) * 0xc2b2ae3d27d4eb4full;
  out ^= splitmix64(s);
  return out;
}

// 53-bit uniform in [0, 1). Mapped from raw engine words so draws do not
// depend on standard-library distribution internals.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double exponential(Rng& rng, double rate) {
  // 1 - U lies in (0, 1], so the log stays finite.
  return -std::log(1.0 - uniform01(rng)) / rate;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

// Unbiased integer in [0, n) by rejection sampling.
inline std::uint32_t uniform_below(Rng& rng, std::uint32_t n) {
  if (n <= 1) return 0;
  const std::uint64_t span = n;
  const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return static_cast<std::uint32_t>(x % span);
}

}  // namespace tanglesim
