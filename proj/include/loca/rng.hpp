#pragma once

#include <cmath>
#include <cstdint>

namespace loca {

// Deterministic PRNG used everywhere seeded sampling is required.
// SplitMix64 core with explicit uniform/normal transforms, so that sequences
// are reproducible bit-for-bit across platforms and standard library versions
// (std::normal_distribution makes no such guarantee).
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller (cosine branch only, no cached partner).
    double normal() {
        double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Uniform integer in [0, n). Modulo bias is < n / 2^64, irrelevant here.
    uint64_t below(uint64_t n) { return next_u64() % n; }

    template <class RandomIt>
    void shuffle(RandomIt first, RandomIt last) {
        const auto n = static_cast<uint64_t>(last - first);
        for (uint64_t i = n; i > 1; --i) {
            uint64_t j = below(i);
            std::swap(first[i - 1], first[j]);
        }
    }

private:
    uint64_t state_;
};

// Independent stream for (seed, stream); used for per-cloud generation so
// datasets are reproducible under any generation order.
inline uint64_t derive_seed(uint64_t seed, uint64_t stream) {
    uint64_t s = seed ^ (0x9E3779B97F4A7C15ULL * (stream + 0x632BE59BD9B4E019ULL));
    Rng r(s);
    r.next_u64();
    return r.next_u64();
}

} // namespace loca
