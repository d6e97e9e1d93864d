#pragma once

#include <cstdint>

namespace bandcodes {

// splitmix64 (Vigna, public domain). Used for seed expansion and for
// deriving independent child streams from a (seed, stream id) pair.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

// xoshiro256** 1.0 (Blackman & Vigna, public domain), seeded through
// splitmix64. Every stochastic operation in the library takes one of these
// by reference; nothing draws from hidden global state. Streams for
// parallel trials come from derive(), which hashes (seed, stream) with
// splitmix64 so trial i is reproducible in isolation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& w : s_) w = sm.next();
        // A pathological seed could still zero the whole state; xoshiro
        // requires a nonzero state.
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[3] = 1;
    }

    static Rng derive(std::uint64_t seed, std::uint64_t stream) {
        SplitMix64 sm(seed);
        std::uint64_t a = sm.next();
        SplitMix64 sm2(a ^ (stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
        return Rng(sm2.next());
    }

    std::uint64_t next_u64() {
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

    // Unbiased draw in [0, bound) by rejection on the top of the 64-bit range.
    std::uint64_t uniform(std::uint64_t bound) {
        if (bound < 2) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % bound;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % bound;
    }

    // 53-bit mantissa value in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool coin() { return (next_u64() >> 63) != 0; }

    // Child stream decorrelated from this one; advances this stream once.
    Rng split() {
        return Rng(SplitMix64(next_u64() ^ 0xa0761d6478bd642fULL).next());
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
};

} // namespace bandcodes
