// random.hpp
//
// Seed splitting and a few portable draws on top of std::mt19937_64.
#pragma once

#include <cstdint>
#include <random>

namespace qltt {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Child seed for item `index` of stream `stream` under `master`:
//   splitmix64(splitmix64(splitmix64(master) ^ stream) + index)
// Each child depends only on (master, stream, index), never on execution order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index) noexcept {
    return splitmix64(splitmix64(splitmix64(master) ^ stream) + index);
}

// Stream tags used across the project.
namespace streams {
inline constexpr std::uint64_t synthetic_column = 0x5359'4E54ULL;  // "SYNT"
inline constexpr std::uint64_t trial = 0x5452'494CULL;             // "TRIL"
inline constexpr std::uint64_t calibration = 0x4341'4C49ULL;       // "CALI"
inline constexpr std::uint64_t test = 0x5445'5354ULL;              // "TEST"
inline constexpr std::uint64_t pilot = 0x5049'4C4FULL;             // "PILO"
inline constexpr std::uint64_t pool = 0x504F'4F4CULL;              // "POOL"
inline constexpr std::uint64_t resample = 0x5245'534DULL;          // "RESM"
}  // namespace streams

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform index in [0, n) without modulo bias.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

}  // namespace qltt
