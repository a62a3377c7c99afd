// Copyright (c) 2026 bankread contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef BANKREAD_PRNG_HPP
#define BANKREAD_PRNG_HPP

#include <cmath>
#include <cstdint>

namespace bankread {

// Seedable 64-bit generator with a splitmix64 state advance. Every random
// draw in the library flows through this class so that results are
// reproducible from the seeds alone; the exact algorithm (state increment,
// output mix, and how floats and gaussians are derived from the raw stream)
// is documented in the README and must not change.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    // Output finalizer. Exposed because derived seeds reuse it.
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    // Uniform in [0,1), 53-bit resolution.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

    // Standard normal via Box-Muller. Consumes exactly two raw outputs and
    // never caches the companion variate, so the draw count per call is
    // fixed.
    double next_gaussian() {
        const double u1 = 1.0 - next_unit(); // (0,1], keeps the log finite
        const double u2 = next_unit();
        const double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    // Uniform integer in [0,n). floor(u*n) clamped to n-1; the tiny modulo
    // bias is irrelevant at 53-bit resolution for the n used here.
    std::uint64_t next_below(std::uint64_t n) {
        const auto k = static_cast<std::uint64_t>(next_unit() * static_cast<double>(n));
        return k >= n ? n - 1 : k;
    }

private:
    std::uint64_t state_;
};

// The (ordinal+1)-th raw output of a SplitMix64 seeded with `seed`,
// computed in O(1). Used wherever a stream of independent sub-seeds is
// needed (one per replicated sample, per pipeline stage, ...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t ordinal) {
    return SplitMix64::mix(seed + 0x9E3779B97F4A7C15ULL * (ordinal + 1));
}

// Deterministic combination of two seeds plus a role tag.
inline std::uint64_t combine_seeds(std::uint64_t a, std::uint64_t b, std::uint64_t tag) {
    return SplitMix64::mix(SplitMix64::mix(a + 0x9E3779B97F4A7C15ULL * (tag + 1)) ^ b);
}

// In-place Fisher-Yates driven by the generator above.
template <class RandomIt>
void seeded_shuffle(RandomIt first, RandomIt last, std::uint64_t seed) {
    SplitMix64 rng(seed);
    const auto n = static_cast<std::uint64_t>(last - first);
    if (n < 2) return;
    for (std::uint64_t i = n - 1; i >= 1; --i) {
        const std::uint64_t j = rng.next_below(i + 1);
        using std::swap;
        swap(first[i], first[j]);
    }
}

} // namespace bankread

#endif // BANKREAD_PRNG_HPP
