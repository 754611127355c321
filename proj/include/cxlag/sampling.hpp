#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace cxlag {

inline constexpr std::uint64_t default_seed = 0xC0FFEE;

/// 64-bit linear congruential generator (Knuth's MMIX constants).
///   x <- x * 6364136223846793005 + 1442695040888963407  (mod 2^64)
///   uniform() = (x >> 11) * 2^-53
/// Fixed here so any reimplementation reproduces the same sample sets.
class Lcg64 {
public:
    explicit Lcg64(std::uint64_t seed = default_seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept
    {
        state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
        return state_;
    }

    /// Uniform in [0, 1).
    double uniform() noexcept { return static_cast<double>(next() >> 11U) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)); }

private:
    std::uint64_t state_;
};

using Interval = std::pair<double, double>;

/// Latin-hypercube points in a box: each axis is cut into `n` strata, every stratum is hit once,
/// strata are shuffled per axis (Fisher-Yates) and jittered inside.  Returns n rows of box.size().
std::vector<std::vector<double>> stratified_points(const std::vector<Interval> &box, std::size_t n,
                                                   std::uint64_t seed = default_seed);

} // namespace cxlag
