#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace coexist
{

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of replicate `index` under `master_seed`:
/// mix64(mix64(master_seed) ^ index).
constexpr std::uint64_t replicate_seed(std::uint64_t master_seed,
                                       std::uint64_t index)
{
    return mix64(mix64(master_seed) ^ index);
}

/// Uniform double in the open interval (0, 1).
inline double uniform_open(Rng& rng)
{
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Exp(1) variate, strictly positive.
inline double standard_exponential(Rng& rng)
{
    return -std::log(uniform_open(rng));
}

}  // namespace coexist
