#pragma once

#include <cmath>
#include <cstdint>

namespace sleepdiff {

// Splittable counter-based PRNG (splitmix64 core). Every consumer derives its
// own stream from a root seed so runs are reproducible regardless of call order.
struct Rng {
    uint64_t state;

    explicit Rng(uint64_t seed = 0) : state(seed * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL) {}

    uint64_t next_u64() {
        state += 0x9E3779B97F4A7C15ULL;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Derive an independent stream; does not advance this generator.
    Rng split(uint64_t stream) const {
        Rng r;
        r.state = state ^ (0xA0761D6478BD642FULL * (stream + 1));
        r.next_u64();
        return r;
    }

    // Uniform in [0, 1).
    double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; hand-rolled so sequences are identical across stdlibs.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Uniform integer in [0, n).
    uint64_t below(uint64_t n) { return next_u64() % n; }

    template <typename Container>
    void shuffle(Container& c) {
        for (size_t i = c.size(); i > 1; --i) {
            size_t j = below(i);
            std::swap(c[i - 1], c[j]);
        }
    }
};

}  // namespace sleepdiff
