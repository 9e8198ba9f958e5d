#pragma once

// Counter-based Gaussian noise.  Every increment is a pure function of
// (root seed, stream, path, counter), so parallel workers can draw the same
// values in any order and a fixed lineage reproduces a simulation bitwise.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sgcert {

namespace detail {

inline uint64_t splitmix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline uint64_t mix4(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
  uint64_t h = splitmix64(a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  h = splitmix64(h ^ d);
  return h;
}

// strictly inside (0,1)
inline double to_unit(uint64_t z) {
  return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace detail

/// A stream of standard Gaussian increments identified by (seed, stream).
/// Streams are assigned per SDE coordinate; the path index selects an
/// independent substream so that path simulation parallelizes trivially.
struct NoiseStream {
  uint64_t seed = 0;
  uint64_t stream = 0;

  double uniform(uint64_t path, uint64_t counter) const {
    return detail::to_unit(detail::mix4(seed, stream, path, counter));
  }

  /// k-th N(0,1) increment of the given path (Box-Muller on two counters).
  double gaussian(uint64_t path, uint64_t k) const {
    const double u1 = uniform(path, 2 * k);
    const double u2 = uniform(path, 2 * k + 1);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  NoiseStream with_stream(uint64_t s) const { return {seed, s}; }
};

}  // namespace sgcert
