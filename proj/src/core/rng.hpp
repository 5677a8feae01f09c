#pragma once

#include <cstdint>
#include <cstddef>

namespace scmc {

// xoshiro256++ with splitmix64 state expansion. All randomness in the
// project flows through this generator so that a run is reproducible
// bit-for-bit across platforms; std::random distributions are avoided
// because their output is implementation-defined.
//
// Seeding discipline: a consumer derives its own stream with
// Rng(seed).split(tag), where tag identifies the consumer (model init,
// data generation, k-means restarts, ...). Independent consumers never
// share a stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& si : s_) si = splitmix64(x);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1): top 53 bits.
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        // Lemire-style rejection keeps the draw unbiased.
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        std::uint64_t l = static_cast<std::uint64_t>(m);
        if (l < n) {
            std::uint64_t t = (0 - n) % n;
            while (l < t) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * n;
                l = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Marsaglia polar method; deterministic given the stream.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, q;
        do {
            u = uniform(-1.0, 1.0);
            v = uniform(-1.0, 1.0);
            q = u * u + v * v;
        } while (q >= 1.0 || q == 0.0);
        double f = __builtin_sqrt(-2.0 * __builtin_log(q) / q);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    // Derive an independent stream for a named consumer.
    Rng split(std::uint64_t tag) {
        std::uint64_t x = next_u64() ^ (tag * 0x9E3779B97F4A7C15ULL);
        return Rng(splitmix64(x));
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t s_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace scmc
