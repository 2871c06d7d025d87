#pragma once

#include <cmath>
#include <cstdint>

// Counter-based random streams. Every draw is addressed by a key
// (base_seed, path, mode, step), so truncating modes or reordering work
// items never shifts the draws of anything else. No generator state is
// carried between calls.

namespace shesim::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

// Collapses a 4-word counter into one well-mixed 64-bit key.
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t path,
                                std::uint64_t mode, std::uint64_t step) {
    std::uint64_t h = mix64(seed + kGolden);
    h = mix64(h ^ (path + 0xbf58476d1ce4e5b9ULL));
    h = mix64(h ^ (mode + 0x94d049bb133111ebULL));
    h = mix64(h ^ (step + 0xd6e8feb86659fd93ULL));
    return h;
}

// Maps 64 random bits to (0,1); never returns 0 or 1, so logs are safe.
inline double uniform01(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// One standard normal per counter, via Box-Muller on two derived words.
inline double standard_normal(std::uint64_t seed, std::uint64_t path,
                              std::uint64_t mode, std::uint64_t step) {
    const std::uint64_t key = stream_key(seed, path, mode, step);
    const double u1 = uniform01(mix64(key + kGolden));
    const double u2 = uniform01(mix64(key + 2 * kGolden));
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace shesim::rng
