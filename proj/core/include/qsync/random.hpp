#pragma once

#include <cstdint>
#include <random>

namespace qsync {

using Rng = std::mt19937_64;

/// Seed of stream `index` under master seed `seed`: two rounds of splitmix64
/// over (seed, index). Streams are independent of scheduling, so ensembles are
/// bit-reproducible for any thread count.
[[nodiscard]] constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(seed) ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

[[nodiscard]] inline Rng make_stream(std::uint64_t seed, std::uint64_t index) {
    return Rng(stream_seed(seed, index));
}

}  // namespace qsync
