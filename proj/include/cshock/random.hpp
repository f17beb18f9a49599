#pragma once

#include <cstdint>
#include <random>

namespace cshock {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent substreams keyed by (seed, path, substream). A path's noise is
/// a pure function of these three numbers, which is what makes common random
/// numbers and scheduling-independent results possible.
inline Engine make_stream(std::uint64_t seed, std::uint64_t path, std::uint64_t substream) {
  const std::uint64_t key = splitmix64(splitmix64(splitmix64(seed) ^ path) ^ (substream * 0x632be59bd9b4e019ULL));
  return Engine(key);
}

}  // namespace cshock
