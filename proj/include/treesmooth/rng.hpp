#pragma once

#include <cstdint>
#include <random>

namespace treesmooth {

/// SplitMix64 finalizer. Used to derive independent child seeds from a
/// parent seed and a stream index, so that work items can be fitted in any
/// order (or in parallel) with bit-identical results.
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace treesmooth
