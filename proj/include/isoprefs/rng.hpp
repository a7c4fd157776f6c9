#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace isoprefs {

// All randomized code in this library draws through the helpers below instead
// of std::*_distribution. The standard distributions are implementation
// defined, so two builds against different standard libraries could disagree;
// these helpers pin the exact bit stream, which is what makes the
// byte-identical-rerun guarantees testable.

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Independent child stream for worker `salt` (tree index, window index, ...).
// Work split across threads stays reproducible because each unit of work owns
// a stream derived only from the master seed and its own index.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) noexcept {
    return splitmix64(master ^ splitmix64(salt + 0x51ed2701'9c7d4be3ull));
}

// Uniform double in [0,1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Unbiased integer in {0, ..., n-1}; n must be > 0.
std::size_t uniform_index(Rng& rng, std::size_t n);

// Standard normal via Box-Muller (two uniforms per draw, nothing cached).
double gaussian(Rng& rng);

// Fisher-Yates permutation of {0, ..., m-1}.
std::vector<std::uint32_t> random_permutation(Rng& rng, std::uint32_t m);

// k distinct values from {0, ..., n-1}. Order is an artifact of the
// algorithm, not sorted; callers that care about tie-breaking get a
// deterministic order for a fixed seed.
std::vector<std::uint32_t> sample_without_replacement(Rng& rng, std::uint32_t n,
                                                      std::uint32_t k);

} // namespace isoprefs
