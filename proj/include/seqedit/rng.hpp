#pragma once

#include <cstdint>
#include <random>

namespace seqedit {

using Rng = std::mt19937_64;

// splitmix64; used to derive well-separated stream seeds from one master
// seed so that independent components never share a stream.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::uint64_t s = seed;
  for (std::uint64_t i = 0; i <= stream % 17; ++i) splitmix64(s);
  s ^= stream * 0xda942042e4dd58b5ULL;
  return Rng(splitmix64(s));
}

// Uniform real in [0, 1). Hand-rolled so results do not depend on the
// standard library's distribution implementation.
inline double rand_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform real in [0, hi).
inline double rand_real(Rng& rng, double hi) { return rand_unit(rng) * hi; }

// Uniform index in [0, n); n must be positive.
inline std::size_t rand_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(rand_unit(rng) * static_cast<double>(n)) % n;
}

// Uniform integer in [lo, hi] inclusive.
inline int rand_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rand_index(rng, static_cast<std::size_t>(hi - lo + 1)));
}

}  // namespace seqedit
