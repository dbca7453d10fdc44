#pragma once

// Seeded, portable pseudorandom draws for scenario simulation.
//
// Draws are counter-based: each (seed, stream, counter) triple is hashed
// through splitmix64 (Steele, Lea & Flood's 64-bit finalizer, the same mix
// used to seed xoshiro generators). Counter addressing means a draw for
// loan L in month M is independent of how many draws other loans consumed,
// so sweeps over CPR/CDR keep per-loan draw sequences aligned.

#include <cstdint>

namespace mbsdao {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Mixes a seed with stream/counter coordinates into one 64-bit word.
inline std::uint64_t mix_draw(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter,
                              std::uint64_t tag = 0) {
    std::uint64_t h = splitmix64(seed ^ 0x5851f42d4c957f2dULL);
    h = splitmix64(h ^ stream);
    h = splitmix64(h ^ counter);
    h = splitmix64(h ^ tag);
    return h;
}

// Uniform double in [0, 1) from the top 53 bits of a draw.
inline double unit_uniform(std::uint64_t word) {
    return static_cast<double>(word >> 11) * 0x1.0p-53;
}

inline double uniform_draw(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter,
                           std::uint64_t tag = 0) {
    return unit_uniform(mix_draw(seed, stream, counter, tag));
}

// Uniform integer in [lo, hi] (inclusive) by 128-bit range scaling.
inline std::int64_t uniform_int(std::uint64_t word, std::int64_t lo, std::int64_t hi) {
    if (hi <= lo)
        return lo;
    unsigned __int128 span = static_cast<unsigned __int128>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>((static_cast<unsigned __int128>(word) * span) >> 64);
}

} // namespace mbsdao
