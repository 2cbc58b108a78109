#pragma once

#include <cstdint>

namespace tsvf {

/// Counter-based uniform stream. Values depend only on (seed, counter), so
/// trial i can be reproduced in isolation and results are independent of
/// execution order or parallelism.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t stream_u64(std::uint64_t seed, std::uint64_t counter) {
    return mix64(mix64(seed + 0x9E3779B97F4A7C15ull * (counter + 1)));
}

/// Uniform double in [0, 1) with 53 random bits.
inline double stream_unit(std::uint64_t seed, std::uint64_t counter) {
    return static_cast<double>(stream_u64(seed, counter) >> 11) * 0x1.0p-53;
}

} // namespace tsvf
