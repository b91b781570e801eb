#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sfp {

// Deterministic random source. std::mt19937_64 has a standardized bit stream,
// but the std::*_distribution adaptors are implementation-defined, so every
// transform from bits to variates is spelled out here. This is what makes
// "same seed, same draws" hold across compilers and library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on [0, 1): 53 random mantissa bits.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0, 1]: shifts the grid so log() is always safe.
    double uniform_pos() {
        return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; the sine twin is cached so consumption
    // of the underlying stream is two uniforms per two normals.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.28318530717958647692 * u2;
        cached_ = radius * std::sin(angle);
        have_cached_ = true;
        return radius * std::cos(angle);
    }

    double exponential() { return -std::log(uniform_pos()); }

    // Uniform integer in [0, n) by bitmask rejection (unbiased, deterministic).
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        std::uint64_t mask = n - 1;
        mask |= mask >> 1;
        mask |= mask >> 2;
        mask |= mask >> 4;
        mask |= mask >> 8;
        mask |= mask >> 16;
        mask |= mask >> 32;
        for (;;) {
            const std::uint64_t x = gen_() & mask;
            if (x < n) return x;
        }
    }

private:
    std::mt19937_64 gen_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

// Derives an independent substream seed (chain index, bootstrap replicate,
// ...) from a base seed. splitmix64 finalizer over base xor golden-ratio
// multiples; distinct streams never collide in practice.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (stream + 1);
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

} // namespace sfp
