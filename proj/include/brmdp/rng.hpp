#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace brmdp {

/// SplitMix64 step; used to turn structured seed tuples into well-mixed states.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Mix an ordered tuple (base seed, replication index, method index, ...) into one
/// 64-bit seed. Every consumer of randomness derives its stream this way so that
/// results are reproducible regardless of execution order or worker count.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x243f6a8885a308d3ull;  // arbitrary nonzero start
    for (std::uint64_t p : parts) {
        h = splitmix64(h ^ splitmix64(p));
    }
    return h;
}

/// Seeded engine factory; all randomness in the library flows through this type.
inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace brmdp
