#pragma once

#include <cstdint>

namespace bvc {

// SplitMix64 mixing step; used to derive independent stream seeds from counters
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// folds a counter into an existing stream key
inline uint64_t mixKey(uint64_t key, uint64_t counter) {
    return mix64(key ^ (counter + 0x9e3779b97f4a7c15ull));
}

// xoshiro256++ generator seeded from a counter-derived key; gives reproducible,
// scheduling-independent streams (one stream per walk/sample/round as needed).
// Uniform doubles are produced from the top 53 bits so results are identical
// across platforms, unlike std::uniform_real_distribution.
class Rng {
public:
    explicit Rng(uint64_t key = 0) {
        uint64_t z = key;
        for (int i = 0; i < 4; i++) {
            z += 0x9e3779b97f4a7c15ull;
            s[i] = mix64(z);
        }
    }
    Rng(uint64_t seed, uint64_t stream) : Rng(mixKey(mix64(seed), stream)) {}

    uint64_t next() {
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

    // uniform in [0, 1)
    double uniform() { return (next() >> 11) * 0x1.0p-53; }

    // uniform in [a, b)
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // uniform integer in [0, n)
    uint64_t below(uint64_t n) { return next() % n; }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s[4];
};

} // namespace bvc
