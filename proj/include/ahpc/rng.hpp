#pragma once

#include <cmath>
#include <cstdint>

namespace ahpc {

// SplitMix64 finalizer. Pure scramble, no stream state.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Key derivation for counter-based draws. Nothing here depends on call
// order, so encoder and decoder can regenerate any (seed, frame, start)
// stream independently.
constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t k = mix64(seed ^ 0x2545f4914f6cdd1dULL);
    k = mix64(k ^ a ^ 0x9e3779b97f4a7c15ULL);
    k = mix64(k ^ b ^ 0xd1b54a32d192ed03ULL);
    return k;
}

// Deterministic sequential generator (SplitMix64).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        return mix64(z);
    }

    // Uniform in [0, 1).
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [-scale, +scale).
    double next_symmetric(double scale) { return (2.0 * next_unit() - 1.0) * scale; }

    // Standard normal via Box-Muller. Two draws per value; portable by
    // construction (std::normal_distribution is implementation-defined).
    double next_gaussian() {
        double u1 = 1.0 - next_unit(); // (0, 1]
        double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t state_;
};

} // namespace ahpc
