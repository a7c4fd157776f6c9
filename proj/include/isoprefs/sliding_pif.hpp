#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "isoprefs/geometry.hpp"
#include "isoprefs/preference.hpp"
#include "isoprefs/range_image.hpp"
#include "isoprefs/ruzhash.hpp"

// Window-wise preference isolation over range images. The image is tiled with
// half-overlapping square windows; each window runs its own sample-embed-score
// pipeline on its valid pixels, and a pixel's final score is the mean over the
// windows that scored it. Models are sampled from the window's own pixels, so
// minimal samples stay local to the surface patch under test.

namespace isoprefs {

struct WindowGrid {
    std::size_t window_side = 0; // omega, pixels
    std::size_t stride = 0;      // half the window, rounded up
    std::vector<std::pair<std::size_t, std::size_t>> windows; // (row0, col0), row-major
};

// Window origins at multiples of the stride, plus one clipped tail position
// per axis when the last full window stops short of the border. Every pixel
// lands in one to four windows; interior pixels in exactly four.
WindowGrid enumerate_windows(std::size_t height, std::size_t width, std::size_t omega);
WindowGrid enumerate_windows(const RangeImage& image, std::size_t omega);

// How many models each window may draw before the preference matrices of all
// windows, at s_bits per entry and (delta/k)^2 entries per point, would
// overrun the budget. k is the image-side-to-window ratio delta/omega.
std::uint64_t models_per_window(std::uint32_t s_bits, std::uint64_t budget_bytes,
                                double delta, double k);

// Robust noise scale of a 3D point patch. A least median of squares search
// over minimal three-point planes locates the majority plane, the patch is
// trimmed to its neighborhood, and a total least squares refit on the kept
// points yields a 1.4826-MAD scale of the orthogonal residuals. Survives a
// deep defect covering anything short of half the patch, which an ordinary
// least squares fit does not: the defect drags the plane itself before any
// robust scale gets taken. Deterministic, a pure function of the points.
// Floored at 1e-12 so a perfectly planar patch still yields a usable
// preference bandwidth.
double estimate_window_sigma(const Matrix& points);

struct SlidingPifParams {
    std::size_t omega = 0;                   // window side, in [1, min(height, width)]
    std::uint64_t budget_bytes = 1ull << 30; // cap on total preference-matrix storage
    std::uint32_t s_bits = 32;               // nominal bits per matrix entry in the budget model
    std::uint32_t trees = 100;
    std::uint32_t subsample = 256;
    std::uint32_t branching = 2;
    std::uint64_t seed = 0;
    double k_multiplier = 3.0;
    PreferenceMode mode = PreferenceMode::continuous;
    std::optional<double> sigma_override; // skip the per-window estimate entirely
    bool logb_norm = false;
};

struct SlidingPifStats {
    std::size_t windows_total = 0;
    std::size_t windows_skipped = 0; // fewer valid pixels than a minimal sample
    std::uint64_t models_per_window = 0;
    std::int64_t max_window_bytes = 0; // largest point + preference matrix pair
};

// Per-pixel anomaly map, row-major height*width. Invalid pixels and pixels
// whose every covering window was skipped hold NaN; scored pixels hold the
// unweighted mean of their window scores, merged in window-index order so the
// map is byte-identical for any worker count. Window i draws its models with
// derive_seed(seed, 2i) and builds its forest with derive_seed(seed, 2i+1).
std::vector<double> sliding_pif(const RangeImage& image, const ModelFamily& family,
                                const SlidingPifParams& params,
                                SlidingPifStats* stats = nullptr);

void write_score_map_csv(const std::string& path, const RangeImage& image,
                         const std::vector<double>& map);

} // namespace isoprefs
