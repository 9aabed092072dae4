#pragma once

#include <cstdint>
#include <random>

namespace linsync {

// All stochastic components draw from a 64-bit Mersenne Twister. Streams are
// bit-reproducible for a given seed within one build of the library.
using Rng = std::mt19937_64;

/// SplitMix64 output function.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Derives the seed of an independent stream from a master seed and two
/// indices (for sweeps: cell index and realization index). Stable across
/// thread counts and scheduling.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) noexcept;

} // namespace linsync
