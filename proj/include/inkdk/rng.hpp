#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace inkdk {

using Rng = std::mt19937_64;

/// 64-bit FNV-1a over raw bytes.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Seed of the stream named (label, a, b) under a base seed.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view label,
                                    std::uint64_t a = 0, std::uint64_t b = 0) noexcept {
    std::uint64_t h = splitmix64(base ^ fnv1a64(label));
    h = splitmix64(h ^ a);
    return splitmix64(h ^ (b * 0x9e3779b97f4a7c15ull));
}

/// Uniform draw on [lo, hi]; returns lo exactly when the range is degenerate.
inline double uniform(Rng& rng, double lo, double hi) {
    const double u = std::generate_canonical<double, 53>(rng);
    return lo + (hi - lo) * u;
}

} // namespace inkdk
