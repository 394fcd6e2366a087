#pragma once

#include <cstdint>
#include <random>

namespace tgnn {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derive an independent stream from a base seed and a few coordinates
// (graph id, epoch, view index, ...). Same inputs always give the same stream.
template <typename... Parts>
std::uint64_t mix_seed(std::uint64_t seed, Parts... parts) {
  std::uint64_t h = splitmix64(seed);
  ((h = splitmix64(h ^ static_cast<std::uint64_t>(parts))), ...);
  return h;
}

template <typename... Parts>
Rng make_rng(std::uint64_t seed, Parts... parts) {
  return Rng(mix_seed(seed, parts...));
}

}  // namespace tgnn
