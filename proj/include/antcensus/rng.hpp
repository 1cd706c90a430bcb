#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace antcensus {

// Seeded draws throughout the project go through these helpers instead of
// std::uniform_*_distribution: the standard distributions are free to consume
// engine output differently per implementation, which would break the
// "same seed, bytewise-identical output" contract across standard libraries.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from (seed, stream index).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s ^= stream * 0x9e3779b97f4a7c15ull;
    std::uint64_t b = splitmix64(s);
    return a ^ (b + 0x2545f4914f6cdd1dull);
}

/// FNV-1a; stable across platforms (std::hash is not).
inline std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n). Fixed-point multiply keeps the draw sequence
/// identical everywhere; the bias is below 2^-32 for any n that fits 32 bits.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const auto wide = static_cast<unsigned __int128>(rng()) * n;
    return static_cast<std::uint64_t>(wide >> 64);
}

/// Uniform double in [lo, hi).
inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

} // namespace antcensus
