#pragma once

#include <cstdint>
#include <string_view>

namespace ragdec {

/// SplitMix64 step. Used for seed derivation and stateless noise.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// FNV-1a over bytes; stable across platforms (std::hash is not).
inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Map a 64-bit word to a double in [0, 1) using the top 53 bits.
inline double unit_double(uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Deterministic generator. Hand-rolled xorshift-style core so that
/// streams are bit-identical everywhere (std distributions are
/// implementation-defined and would break byte-identical reports).
class Rng {
  public:
    explicit Rng(uint64_t seed) {
        // Expand the seed so that nearby seeds produce unrelated streams.
        s0_ = splitmix64(seed);
        s1_ = splitmix64(s0_);
        if (s0_ == 0 && s1_ == 0) s1_ = 1;
    }

    uint64_t next_u64() {
        // xoroshiro128+
        uint64_t a = s0_;
        uint64_t b = s1_;
        uint64_t r = a + b;
        b ^= a;
        s0_ = ((a << 55) | (a >> 9)) ^ b ^ (b << 14);
        s1_ = (b << 36) | (b >> 28);
        return r;
    }

    /// Uniform double in [0, 1).
    double next_double() { return unit_double(next_u64()); }

    /// Unbiased uniform integer in [0, n). n must be > 0.
    uint64_t next_below(uint64_t n) {
        uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    int next_int(int lo, int hi) {  // inclusive range
        return lo + static_cast<int>(next_below(static_cast<uint64_t>(hi - lo + 1)));
    }

  private:
    uint64_t s0_;
    uint64_t s1_;
};

/// Independent stream for a named sub-task of a seeded run, so results
/// do not depend on evaluation order or parallelism.
inline Rng derive_rng(uint64_t seed, std::string_view tag) {
    return Rng(splitmix64(seed ^ fnv1a64(tag)));
}

}  // namespace ragdec
