#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace daid {

/// splitmix64 finalizer; used to derive independent RNG streams from a root
/// seed plus a tag path, so concurrent consumers (bootstrap replicates,
/// ablation cells) never share state.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic substream: rng_stream(seed, a, b, ...) always yields the
/// same engine for the same arguments, independent of call order.
inline std::mt19937_64 rng_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = mix64(seed);
    for (std::uint64_t t : tags) s = mix64(s ^ t);
    return std::mt19937_64(s);
}

inline std::mt19937_64 rng_stream(std::uint64_t seed, std::uint64_t a) {
    return rng_stream(seed, {a});
}

inline std::mt19937_64 rng_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return rng_stream(seed, {a, b});
}

inline std::mt19937_64 rng_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return rng_stream(seed, {a, b, c});
}

/// Uniform double in [0,1) from the top 53 bits. Unlike std::uniform_real_
/// distribution, the bit pattern is fixed across standard libraries.
inline double runif01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (one draw per call, second value dropped).
inline double rnorm(std::mt19937_64& rng) {
    double u1 = runif01(rng);
    while (u1 <= 0.0) u1 = runif01(rng);
    const double u2 = runif01(rng);
    const double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

/// Unbiased integer in [0, n) by rejection.
inline std::uint64_t rint_below(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return x % n;
}

/// In-place Fisher-Yates using rint_below, so shuffles are portable too.
template <class T>
void shuffle_inplace(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rint_below(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

/// Stream tags; one per independent random decision in the pipeline.
namespace stream {
inline constexpr std::uint64_t kInit = 0x01;
inline constexpr std::uint64_t kShuffle = 0x02;
inline constexpr std::uint64_t kPairs = 0x03;
inline constexpr std::uint64_t kBootstrap = 0x04;
inline constexpr std::uint64_t kScm = 0x05;
inline constexpr std::uint64_t kCell = 0x06;
}  // namespace stream

}  // namespace daid
