#pragma once

// Counter-based random numbers: every variate is a pure function of
// (seed, counter), so samples are reproducible under any evaluation order
// or parallel partitioning.

#include <cmath>
#include <cstdint>

namespace vbkde {

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// 64-bit word at position `counter` of the stream keyed by `seed`.
inline std::uint64_t counter_word(std::uint64_t seed, std::uint64_t counter) {
    return mix64(mix64(seed) ^ mix64(counter * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
}

/// Uniform double in the open interval (0,1).
inline double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
    return ((counter_word(seed, counter) >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via the Box-Muller transform of two counter words.
inline double counter_normal(std::uint64_t seed, std::uint64_t counter) {
    double u1 = counter_uniform(seed, 2 * counter);
    double u2 = counter_uniform(seed, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Combine experiment coordinates into a per-replication seed.
inline std::uint64_t hash_seed(std::uint64_t base, std::uint64_t n, std::uint64_t rep) {
    return mix64(mix64(base) + mix64(n) * 3 + mix64(rep) * 7);
}

}  // namespace vbkde
