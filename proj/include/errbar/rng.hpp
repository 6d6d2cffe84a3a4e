#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

// Deterministic randomness for the whole toolkit.
//
// Two kinds of streams are provided:
//  - SplitMix64: a tiny sequential engine for inherently ordered draws
//    (weight init, epoch shuffles, bootstrap resampling).
//  - counter_* functions: stateless draws addressed by (key, counter, slot),
//    so values can be produced in any order from any thread and still come
//    out identical. Used wherever output must not depend on scheduling.
//
// All seeds flowing through the code are derived with substream_seed(), never
// by ad-hoc arithmetic, so two streams collide only if their full derivation
// paths match.

namespace errbar {

namespace detail {
inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// splitmix64 output mix; bijective on 64-bit values with strong avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// [0, 1) with 53 random mantissa bits.
constexpr double to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}
}  // namespace detail

class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

    constexpr std::uint64_t next() {
        std::uint64_t z = (state_ += detail::kGolden);
        return detail::mix64(z);
    }

    // [0, 1)
    double uniform() { return detail::to_unit(next()); }

    // [0, n); n must be >= 1. Fixed-point multiply keeps it branch-free and
    // deterministic (bias is O(n / 2^64), irrelevant here).
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

private:
    std::uint64_t state_;
};

// Box-Muller; consumes two draws per call, never caches the second value.
inline double gaussian(SplitMix64& gen) {
    const double u1 = detail::to_unit(gen.next() | 1u);  // keep log() finite
    const double u2 = gen.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

// Derive a child seed from a root seed and a path of stream tags. Equal
// (root, path) pairs always yield the same child.
inline std::uint64_t substream_seed(std::uint64_t root,
                                    std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = detail::mix64(root + detail::kGolden);
    for (std::uint64_t v : path) {
        h = detail::mix64(h ^ (v + detail::kGolden));
    }
    return h;
}

// Stateless draws: one value per (key, counter, slot) address.
inline double counter_uniform(std::uint64_t key, std::uint64_t counter, std::uint64_t slot) {
    return detail::to_unit(substream_seed(key, {counter, slot}));
}

inline std::uint64_t counter_below(std::uint64_t key, std::uint64_t counter,
                                   std::uint64_t slot, std::uint64_t n) {
    const std::uint64_t x = substream_seed(key, {counter, slot});
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(x) * n) >> 64);
}

// Occupies slots (2*slot, 2*slot + 1) of the (key, counter) address space.
inline double counter_gaussian(std::uint64_t key, std::uint64_t counter, std::uint64_t slot) {
    const std::uint64_t bits = substream_seed(key, {counter, 2 * slot}) | 1u;
    const double u1 = detail::to_unit(bits);
    const double u2 = counter_uniform(key, counter, 2 * slot + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

// Registry of stream tags. One constant per independent use so derivation
// paths stay collision-free as the code grows.
namespace tag {
inline constexpr std::uint64_t kWeightInit = 1;
inline constexpr std::uint64_t kShuffle = 2;
inline constexpr std::uint64_t kBootstrap = 3;
inline constexpr std::uint64_t kMember = 4;
inline constexpr std::uint64_t kFoldSplit = 5;
inline constexpr std::uint64_t kCvFold = 6;
inline constexpr std::uint64_t kAugment = 7;
inline constexpr std::uint64_t kCalibrationFold = 8;
inline constexpr std::uint64_t kFinalEnsemble = 9;
inline constexpr std::uint64_t kSynthFeatures = 10;
inline constexpr std::uint64_t kSynthNoise = 11;
inline constexpr std::uint64_t kModelA = 12;
inline constexpr std::uint64_t kModelB = 13;
inline constexpr std::uint64_t kCurve = 14;
inline constexpr std::uint64_t kCurveCell = 15;
inline constexpr std::uint64_t kBenchData = 16;
}  // namespace tag

}  // namespace errbar
