#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace spikebench {

// mt19937_64 output is pinned by the standard. The helpers below avoid the
// std::*_distribution classes on purpose: their algorithms are
// implementation-defined, and we need identical random streams on every
// platform for bit-identical training runs.
using Rng = std::mt19937_64;

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_range(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Standard normal via Box-Muller. Consumes exactly two uniforms per call,
// which keeps the draw count (and therefore the stream) predictable.
inline double normal01(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  const double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and up to two indices
// (sample number, epoch, client id, ...). Used everywhere a sub-task needs
// its own generator so results do not depend on processing order.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(seed ^ splitmix64(a ^ splitmix64(b ^ 0x5bf03635ab5c60f1ULL)));
}

}  // namespace spikebench
