#pragma once

#include <cstdint>
#include <vector>

#include "mlc/errors.hpp"

namespace mlc {

/// binom(n, k) with saturation at 2^63-1.
inline std::int64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::int64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r < 0) return INT64_MAX;
    }
    return r;
}

inline constexpr std::int64_t kSubsetCutoff = 1'000'000;

/// All k-element subsets of {0,...,d-1} in lexicographic order.
/// Enumeration beyond kSubsetCutoff subsets is refused rather than attempted.
inline std::vector<std::vector<int>> index_subsets(int d, int k) {
    if (k < 1 || k > d) throw ValidationError("index_subsets: k out of range");
    if (binomial(d, k) > kSubsetCutoff) {
        throw ValidationError("index_subsets: binom(d,k) exceeds the combinatorial cutoff");
    }
    std::vector<std::vector<int>> out;
    out.reserve(static_cast<size_t>(binomial(d, k)));
    std::vector<int> cur(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) cur[static_cast<size_t>(i)] = i;
    while (true) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[static_cast<size_t>(i)] == d - k + i) --i;
        if (i < 0) break;
        ++cur[static_cast<size_t>(i)];
        for (int j = i + 1; j < k; ++j) cur[static_cast<size_t>(j)] = cur[static_cast<size_t>(j - 1)] + 1;
    }
    return out;
}

}  // namespace mlc
