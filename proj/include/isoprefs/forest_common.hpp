#pragma once

#include <cmath>
#include <cstddef>

// Helpers shared by every isolation-forest flavour in this library: the
// average-path-length adjustment c(n) from the classic iForest analysis, the
// score transform, and the subsample depth cap.

namespace isoprefs {

// Expected path length of an unsuccessful BST search among n points. Used
// both to extend path lengths at non-singleton leaves and to normalize the
// final score.
inline double adjustment_c(std::size_t n) {
    if (n <= 1) return 0.0;
    if (n == 2) return 1.0;
    const double nn = static_cast<double>(n);
    constexpr double euler_gamma = 0.5772156649;
    return 2.0 * (std::log(nn - 1.0) + euler_gamma) - 2.0 * (nn - 1.0) / nn;
}

// s = 2^(-E[depth] / norm). Degenerate normalizers (single-point subsample)
// give the indifferent score 1/2.
inline double isolation_score(double mean_depth, double norm) {
    if (norm <= 0.0) return 0.5;
    return std::exp2(-mean_depth / norm);
}

// Smallest l with b^l >= psi, i.e. ceil(log_b psi) computed without
// floating-point logs so boundary cases land exactly.
inline int depth_limit_for(std::size_t psi, std::size_t b) {
    if (psi <= 1) return 0;
    int level = 0;
    std::size_t reach = 1;
    while (reach < psi) {
        reach *= b;
        ++level;
    }
    return level;
}

} // namespace isoprefs
