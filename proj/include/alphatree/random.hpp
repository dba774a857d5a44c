#pragma once

// Seeded random streams. Distribution helpers are implemented here rather than
// taken from <random> so that output is bit-identical across standard library
// implementations.

#include <cstddef>
#include <cstdint>
#include <random>

namespace alphatree {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Generator for task `index` of a computation seeded with `seed`. Results of
/// parallel work seeded this way do not depend on scheduling.
Rng make_stream(std::uint64_t seed, std::uint64_t index);

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

/// Uniform integer in [0, n). n must be positive.
std::size_t uniform_index(Rng& rng, std::size_t n);

bool fair_coin(Rng& rng);

}  // namespace alphatree
