#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

namespace cmlab {

/// SplitMix64 finalizer. Used to expand seeds; never as the main generator.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// xoshiro256** (Blackman & Vigna), period 2^256 - 1.
///
/// Satisfies UniformRandomBitGenerator, so it can drive <random>
/// distributions, but the helpers below (uniform01, below) are used on hot
/// paths so that streams are reproducible independent of the standard
/// library implementation.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;
    static constexpr std::string_view algorithm = "xoshiro256**";

    explicit Xoshiro256(std::uint64_t seed = 0) noexcept { reseed(seed); }

    void reseed(std::uint64_t seed) noexcept {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    /// Generator with an explicit internal state (must not be all zero).
    static Xoshiro256 from_state(const std::array<std::uint64_t, 4>& state) noexcept {
        Xoshiro256 g;
        g.s_ = state;
        return g;
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound) by Lemire's nearly-divisionless method.
    std::uint64_t below(std::uint64_t bound) noexcept {
        __uint128_t m = static_cast<__uint128_t>((*this)()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<__uint128_t>((*this)()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool bernoulli(double p) noexcept { return uniform01() < p; }

    /// Standard normal via the Marsaglia polar method (one cached spare).
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
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
        has_spare_ = true;
        return u * f;
    }

    /// Poisson variate. Inversion for small means, PTRS (Hörmann 1993) above.
    std::uint64_t poisson(double mean) noexcept {
        if (!(mean > 0.0)) return 0;
        if (mean < 10.0) {
            const double limit = std::exp(-mean);
            double prod = uniform01();
            std::uint64_t k = 0;
            while (prod > limit) {
                ++k;
                prod *= uniform01();
            }
            return k;
        }
        const double slam = std::sqrt(mean);
        const double loglam = std::log(mean);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2);
        for (;;) {
            const double u = uniform01() - 0.5;
            const double v = uniform01();
            const double us = 0.5 - std::fabs(u);
            const double k = std::floor((2 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
            if (k < 0 || (us < 0.013 && v > us)) continue;
            if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
                -mean + k * loglam - std::lgamma(k + 1)) {
                return static_cast<std::uint64_t>(k);
            }
        }
    }

    const std::array<std::uint64_t, 4>& state() const noexcept { return s_; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Stream for replica `k` under master seed `seed`.
///
/// The state is seeded from seed ^ mix(k + 0x632BE59BD9B4E019), where mix is
/// the SplitMix64 finalizer, so replica streams do not depend on how many
/// replicas are run or in which order.
inline Xoshiro256 derive_stream(std::uint64_t seed, std::uint64_t k) noexcept {
    std::uint64_t key = k + 0x632BE59BD9B4E019ULL;
    const std::uint64_t mixed = splitmix64(key);
    return Xoshiro256(seed ^ mixed);
}

/// Sub-stream of a replica stream, for a named purpose (tag).
inline Xoshiro256 derive_stream(std::uint64_t seed, std::uint64_t k, std::uint64_t tag) noexcept {
    std::uint64_t key = tag * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL;
    return derive_stream(seed ^ splitmix64(key), k);
}

template <class It>
void shuffle(It first, It last, Xoshiro256& rng) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
        const std::uint64_t j = rng.below(i);
        using std::swap;
        swap(first[i - 1], first[j]);
    }
}

}  // namespace cmlab
