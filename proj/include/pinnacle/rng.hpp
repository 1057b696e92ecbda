#pragma once

// Counter-based random numbers: every draw is a pure function of
// (seed, stream, counter), so parallel sweeps reproduce the same trajectory
// regardless of how sites are distributed over workers.

#include <cstdint>

namespace pinnacle {

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class CounterRng {
public:
    constexpr explicit CounterRng(std::uint64_t seed) : key_(splitmix64(seed ^ 0x5851f42d4c957f2dULL)) {}

    [[nodiscard]] constexpr std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const {
        return splitmix64(splitmix64(key_ ^ splitmix64(stream)) + counter);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    [[nodiscard]] constexpr double uniform(std::uint64_t stream, std::uint64_t counter) const {
        return double(bits(stream, counter) >> 11) * 0x1.0p-53;
    }

    [[nodiscard]] constexpr std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
};

/// Derives an independent 64-bit seed for a labelled sub-experiment.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(splitmix64(seed ^ splitmix64(a + 0x632be59bd9b4e019ULL)) ^ splitmix64(b));
}

}  // namespace pinnacle
