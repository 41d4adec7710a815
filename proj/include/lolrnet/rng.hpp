// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>

namespace lolrnet {

/// SplitMix64 output finalizer; a bijective 64-bit mixer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Seed for the stream owned by (seed, bank, path). Every path gets its own
/// generator, so results do not depend on which thread ran it.
[[nodiscard]] constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t bank,
                                                  std::uint64_t path) noexcept {
    std::uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ull);
    h = mix64(h ^ (bank * 0xd1b54a32d192ed03ull + 0x8cb92ba72f3d8dd7ull));
    h = mix64(h ^ (path * 0xaef17502108ef2d9ull + 0x2545f4914f6cdd1dull));
    return h;
}

/// SplitMix64 (Steele, Lea & Flood); satisfies UniformRandomBitGenerator.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    constexpr explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr result_type operator()() noexcept {
        return mix64(state_ += 0x9e3779b97f4a7c15ull);
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

private:
    std::uint64_t state_;
};

}  // namespace lolrnet
