#pragma once

#include <cstdint>

namespace chanlab {

// Counter-based generator so that every (experiment cell, sample) pair owns an
// independent stream derived from one master seed. Parallel and serial runs
// then produce identical draws regardless of scheduling.
struct SplitMix64 {
    uint64_t state;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// uniform in [0,1) with 53 significant bits
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// uniform in (lo, hi), endpoints excluded
    double uniform_open(double lo, double hi) {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return lo + u * (hi - lo);
    }
};

/// Stream seeded from a master seed and up to three stream indices.
inline SplitMix64 substream(uint64_t master, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    SplitMix64 mix(master);
    uint64_t s = mix.next();
    s ^= 0x9e3779b97f4a7c15ULL * (a + 1);
    SplitMix64 mix2(s);
    s = mix2.next() ^ (0xbf58476d1ce4e5b9ULL * (b + 1));
    SplitMix64 mix3(s);
    return SplitMix64(mix3.next() ^ (0x94d049bb133111ebULL * (c + 1)));
}

} // namespace chanlab
