#include "cxlag/sampling.hpp"

#include <numeric>

namespace cxlag {

std::vector<std::vector<double>> stratified_points(const std::vector<Interval> &box, std::size_t n,
                                                   std::uint64_t seed)
{
    Lcg64 rng(seed);
    std::vector<std::vector<double>> rows(n, std::vector<double>(box.size()));
    std::vector<std::size_t> strata(n);
    for (std::size_t axis = 0; axis < box.size(); ++axis) {
        std::iota(strata.begin(), strata.end(), std::size_t{0});
        for (std::size_t k = n; k > 1; --k) {
            const auto j = static_cast<std::size_t>(rng.below(k));
            std::swap(strata[k - 1], strata[j]);
        }
        const auto [lo, hi] = box[axis];
        for (std::size_t r = 0; r < n; ++r) {
            const double u = (static_cast<double>(strata[r]) + rng.uniform()) / static_cast<double>(n);
            rows[r][axis] = lo + (hi - lo) * u;
        }
    }
    return rows;
}

} // namespace cxlag
