#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

namespace tactile {

// log(sum_i exp(x_i)), shifted by the maximum so no term overflows.
// Returns -inf for an empty range or when every term is -inf.
inline double log_sum_exp(std::span<const double> x)
{
    if (x.empty()) {
        return -std::numeric_limits<double>::infinity();
    }
    const double max = *std::max_element(x.begin(), x.end());
    if (!std::isfinite(max)) {
        return max;
    }
    double sum = 0.0;
    for (double v : x) {
        sum += std::exp(v - max);
    }
    return max + std::log(sum);
}

// SplitMix64 finalizer; used to derive independent sub-seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace tactile
