#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sff {

// Seeded random source with named sub-streams. Every consumer of randomness
// derives its own stream, so adding one actor never perturbs the draws seen
// by another (episode-level determinism depends on this).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix(seed)) {}

    // Child stream keyed by (this stream's seed, name, index).
    Rng derive(std::string_view name, std::uint64_t index = 0) const {
        std::uint64_t h = seed_;
        for (char c : name) h = (h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c))) * 0x100000001b3ULL;
        h ^= splitmix(index + 0x9e3779b97f4a7c15ULL);
        return Rng(splitmix(h));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    bool bernoulli(double p) { return uniform01() < p; }

    // Uniform integer in [0, n). n == 0 returns 0.
    std::size_t uniform_index(std::size_t n) {
        if (n <= 1) return 0;
        // reject the tail to avoid modulo bias
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return static_cast<std::size_t>(v % n);
    }

    std::uint64_t seed() const { return seed_; }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace sff
