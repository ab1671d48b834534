#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace predkit {

// Self-contained generators: std:: distributions are implementation-defined,
// which would break the bit-identical-across-platforms output contract.

struct SplitMix64 {
    std::uint64_t s;

    explicit SplitMix64(std::uint64_t seed) : s(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

/// xoshiro256++, seeded through SplitMix64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& w : state_) w = sm.next();
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via the Marsaglia polar method.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    /// Fill `out` with a point drawn uniformly on the unit sphere.
    void unit_sphere(std::span<double> out) {
        double n2;
        do {
            n2 = 0.0;
            for (auto& v : out) {
                v = gaussian();
                n2 += v * v;
            }
        } while (n2 == 0.0);
        const double inv = 1.0 / std::sqrt(n2);
        for (auto& v : out) v *= inv;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Mixes (seed, index) into one well-spread 64-bit stream seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 a(seed ^ 0xA3EC4E93D1B54A32ULL);
    SplitMix64 b(index + 0x9E3779B97F4A7C15ULL);
    return a.next() ^ b.next();
}

/// Independent stream for one ensemble member. Streams are a pure function of
/// (seed, member), so results cannot depend on scheduling or worker count.
inline Rng member_rng(std::uint64_t seed, std::uint64_t member) {
    return Rng(derive_seed(seed, member));
}

}  // namespace predkit
