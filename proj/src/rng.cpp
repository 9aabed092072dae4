#include "linsync/rng.hpp"

namespace linsync {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t split_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ (a * 0xD6E8FEB86659FD93ULL + 1));
    h = splitmix64(h ^ (b * 0xC2B2AE3D27D4EB4FULL + 2));
    return h;
}

} // namespace linsync
