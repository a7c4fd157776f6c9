#include "isoprefs/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace isoprefs {

std::size_t uniform_index(Rng& rng, std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    if (n == 1) return 0;
    // rejection sampling over the top of the range keeps the draw unbiased
    const std::uint64_t bound = n;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return static_cast<std::size_t>(v % bound);
}

double gaussian(Rng& rng) {
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    // u1 = 0 would take log of zero; nudge to the smallest representable draw
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::uint32_t> random_permutation(Rng& rng, std::uint32_t m) {
    std::vector<std::uint32_t> perm(m);
    for (std::uint32_t i = 0; i < m; ++i) perm[i] = i;
    for (std::uint32_t i = m; i > 1; --i) {
        std::uint32_t j = static_cast<std::uint32_t>(uniform_index(rng, i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

std::vector<std::uint32_t> sample_without_replacement(Rng& rng, std::uint32_t n,
                                                      std::uint32_t k) {
    if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
    std::vector<std::uint32_t> out;
    out.reserve(k);
    if (k <= 16) {
        // Floyd's algorithm: O(k) work, no O(n) scratch; the duplicate scan
        // is a linear pass over at most 16 entries
        for (std::uint32_t j = n - k; j < n; ++j) {
            std::uint32_t t = static_cast<std::uint32_t>(uniform_index(rng, j + 1));
            if (std::find(out.begin(), out.end(), t) != out.end()) t = j;
            out.push_back(t);
        }
    } else {
        std::vector<std::uint32_t> pool(n);
        for (std::uint32_t i = 0; i < n; ++i) pool[i] = i;
        for (std::uint32_t i = 0; i < k; ++i) {
            std::uint32_t j =
                i + static_cast<std::uint32_t>(uniform_index(rng, n - i));
            std::swap(pool[i], pool[j]);
        }
        out.assign(pool.begin(), pool.begin() + k);
    }
    return out;
}

} // namespace isoprefs
