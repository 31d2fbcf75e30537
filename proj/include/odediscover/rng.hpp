#pragma once

#include <cstdint>

namespace odediscover::rng {

/// SplitMix64 finalizer; a bijective 64-bit mix.
std::uint64_t mix64(std::uint64_t x);

/// Counter-based key derivation: same tuple, same key.
std::uint64_t derive_key(std::uint64_t a, std::uint64_t b, std::uint64_t c);

/// Uniform in (0, 1) for a counter value under a key.
double uniform(std::uint64_t key, std::uint64_t counter);

/// Standard normal draw addressed by (seed, stream, index). Stateless, so
/// draws can be produced in any order or in parallel.
double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

}  // namespace odediscover::rng
