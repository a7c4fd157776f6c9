#pragma once

#include <cstddef>

// Four-lane accumulation for the hot inner products. Plain sequential
// reductions cannot be vectorized without reassociation licenses, so the lane
// split is done by hand; the lane combination order is fixed, which keeps
// every caller bit-identical to every other caller for the same inputs.

namespace isoprefs::detail {

inline double lane_dot(const double* a, const double* b, std::size_t n) {
    double c0 = 0, c1 = 0, c2 = 0, c3 = 0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        c0 += a[i] * b[i];
        c1 += a[i + 1] * b[i + 1];
        c2 += a[i + 2] * b[i + 2];
        c3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) c0 += a[i] * b[i];
    return (c0 + c1) + (c2 + c3);
}

inline double lane_norm2(const double* a, std::size_t n) {
    return lane_dot(a, a, n);
}

struct MinMaxSums {
    double smin = 0;
    double smax = 0;
};

inline MinMaxSums lane_minmax(const double* a, const double* b, std::size_t n) {
    double lo0 = 0, lo1 = 0, hi0 = 0, hi1 = 0;
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        lo0 += a[i] < b[i] ? a[i] : b[i];
        hi0 += a[i] < b[i] ? b[i] : a[i];
        lo1 += a[i + 1] < b[i + 1] ? a[i + 1] : b[i + 1];
        hi1 += a[i + 1] < b[i + 1] ? b[i + 1] : a[i + 1];
    }
    for (; i < n; ++i) {
        lo0 += a[i] < b[i] ? a[i] : b[i];
        hi0 += a[i] < b[i] ? b[i] : a[i];
    }
    return {lo0 + lo1, hi0 + hi1};
}

inline double lane_sqdist(const double* a, const double* b, std::size_t n) {
    double c0 = 0, c1 = 0, c2 = 0, c3 = 0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const double d0 = a[i] - b[i];
        const double d1 = a[i + 1] - b[i + 1];
        const double d2 = a[i + 2] - b[i + 2];
        const double d3 = a[i + 3] - b[i + 3];
        c0 += d0 * d0;
        c1 += d1 * d1;
        c2 += d2 * d2;
        c3 += d3 * d3;
    }
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        c0 += d * d;
    }
    return (c0 + c1) + (c2 + c3);
}

} // namespace isoprefs::detail
