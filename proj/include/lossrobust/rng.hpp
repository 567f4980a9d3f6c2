#pragma once

#include <cstdint>
#include <cmath>

namespace lossrobust {

/**
 * @brief Deterministic 64-bit random stream: xoshiro256++ seeded via SplitMix64.
 *
 * Both algorithms are fixed here so that streams are reproducible across
 * platforms and standard-library versions.  The state expansion follows the
 * reference construction: four SplitMix64 outputs of the seed initialise the
 * xoshiro256++ state.  Uniform doubles take the top 53 bits of the output;
 * normal deviates use the Box-Muller transform with a cached spare, so draw
 * order is part of the contract.
 */
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& w : state_) w = splitmix64(x);
    }

    /// SplitMix64 step; also usable standalone to derive child seeds.
    static uint64_t splitmix64(uint64_t& x) {
        x += 0x9e3779b97f4a7c15ull;
        uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Derives an independent child seed from a base seed and a stream index.
    static uint64_t derive(uint64_t base, uint64_t stream) {
        uint64_t x = base ^ (0x9e3779b97f4a7c15ull * (stream + 1));
        uint64_t a = splitmix64(x);
        uint64_t b = splitmix64(x);
        return a ^ (b << 1);
    }

    uint64_t next() {
        uint64_t* s = state_;
        const uint64_t result = rotl(s[0] + s[3], 23) + s[0];
        const uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Standard normal via Box-Muller; consumes two uniforms per pair.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // 1 - u keeps the argument of log strictly positive.
        double u1 = 1.0 - uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace lossrobust
