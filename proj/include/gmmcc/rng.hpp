#pragma once

#include <cstdint>
#include <random>

namespace gmmcc {

/// Engine used for every stochastic routine in the library.
using Rng = std::mt19937_64;

/// Seeds an engine from the full 64-bit seed (both halves go through seed_seq).
inline Rng make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32)};
  return Rng(seq);
}

/// Derives an independent substream seed for (seed, stream) via splitmix64.
/// Used to give every sweep point and worker its own reproducible stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace gmmcc
