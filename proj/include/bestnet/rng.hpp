#pragma once

#include <cstdint>
#include <cmath>
#include <random>

// Deterministic stream seeding and inverse-CDF draws. Simulation results must
// be bit-identical for a given seed on any conforming platform, so we only
// rely on mt19937_64's fully specified output sequence and do the
// uint64 -> double conversion ourselves instead of going through
// std::*_distribution (whose algorithms are implementation-defined).

namespace bestnet {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// One engine per (seed, stream id, purpose tag). Coupled simulations share
// arrival and size streams by constructing them with identical keys.
inline std::mt19937_64 make_stream(uint64_t seed, uint64_t id, uint64_t tag) {
  uint64_t h = splitmix64(seed);
  h ^= splitmix64(id + 0x9E3779B97F4A7C15ull);
  h ^= splitmix64(tag + 0xD1B54A32D192ED03ull);
  return std::mt19937_64(splitmix64(h));
}

// Uniform on (0, 1]: 53 mantissa bits, never returns 0 so log() is safe.
inline double u01(std::mt19937_64& g) {
  return static_cast<double>((g() >> 11) + 1) * 0x1.0p-53;
}

inline double exp_draw(std::mt19937_64& g, double mean) {
  return -mean * std::log(u01(g));
}

}  // namespace bestnet
