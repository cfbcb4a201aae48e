#pragma once

#include <cstdint>
#include <random>

namespace did {

// Seeded generator with fixed bit-level mappings. std::mt19937_64 output is
// specified by the standard; the distribution mappings below are our own so
// that every draw is reproducible across platforms and library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform double in [0, 1), 53 bits of randomness.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n). n must be > 0.
    std::uint64_t index(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = gen_();
            if (r >= threshold) return r % n;
        }
    }

    std::uint64_t next() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

} // namespace did
