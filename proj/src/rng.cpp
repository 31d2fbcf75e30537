#include "odediscover/rng.hpp"

#include <cmath>
#include <numbers>

namespace odediscover::rng {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_key(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = mix64(a ^ 0x243f6a8885a308d3ULL);
    h = mix64(h ^ b);
    return mix64(h ^ mix64(c + 0x13198a2e03707344ULL));
}

double uniform(std::uint64_t key, std::uint64_t counter) {
    const std::uint64_t bits = mix64(key ^ mix64(counter));
    // 53 random bits, offset by half an ulp so 0 and 1 never occur.
    return (double(bits >> 11) + 0.5) * 0x1.0p-53;
}

double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const std::uint64_t key = derive_key(seed, stream, index);
    const double u1 = uniform(key, 0);
    const double u2 = uniform(key, 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace odediscover::rng
