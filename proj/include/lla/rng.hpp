#pragma once

#include <cmath>
#include <cstdint>

// Counter-based random number generation. Every draw is a pure function of
// the key chain, so sampling is reproducible regardless of evaluation order
// or worker count.

namespace lla::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t v) {
    return splitmix64(seed ^ (v + 0x9E3779B97F4A7C15ull + (seed << 6) + (seed >> 2)));
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return mix(mix(seed, a), b);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix(mix(mix(seed, a), b), c);
}

// Uniform double in [0, 1) with 53 random mantissa bits.
inline double uniform01(std::uint64_t key) {
    return static_cast<double>(splitmix64(key) >> 11) * 0x1.0p-53;
}

inline double uniform(std::uint64_t key, double lo, double hi) {
    return lo + (hi - lo) * uniform01(key);
}

// Standard normal via Box-Muller on two decorrelated sub-streams of the key.
inline double gaussian(std::uint64_t key) {
    double u1 = static_cast<double>((splitmix64(mix(key, 0x9E37ull)) >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    double u2 = uniform01(mix(key, 0x79B9ull));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace lla::rng
