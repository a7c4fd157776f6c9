#include "isoprefs/sliding_pif.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "isoprefs/dataset.hpp"
#include "isoprefs/parallel.hpp"
#include "isoprefs/rng.hpp"

namespace isoprefs {

namespace {

// Origins at 0, s, 2s, ... while a full window fits, then one clipped tail
// when the last full window leaves the border uncovered. Consecutive origins
// are at least half a window apart, so no pixel sees more than two windows
// per axis.
std::vector<std::size_t> axis_origins(std::size_t length, std::size_t omega,
                                      std::size_t stride) {
    std::vector<std::size_t> origins;
    std::size_t p = 0;
    while (p + omega <= length) {
        origins.push_back(p);
        p += stride;
    }
    if (origins.empty() || origins.back() + omega < length) origins.push_back(p);
    return origins;
}

double median_of(std::vector<double>& values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    const double hi = values[n / 2];
    if (n % 2 == 1) return hi;
    return 0.5 * (values[(n - 1) / 2] + hi);
}

struct WindowResult {
    bool skipped = false;
    std::vector<std::size_t> pixels; // row-major pixel ids, window-local order
    std::vector<double> scores;
    std::int64_t matrix_bytes = 0;
};

} // namespace

WindowGrid enumerate_windows(std::size_t height, std::size_t width, std::size_t omega) {
    if (omega == 0 || omega > std::min(height, width))
        throw std::invalid_argument("window side must be in [1, min(height, width)]");
    WindowGrid grid;
    grid.window_side = omega;
    grid.stride = std::max<std::size_t>(1, (omega + 1) / 2);
    const auto rows = axis_origins(height, omega, grid.stride);
    const auto cols = axis_origins(width, omega, grid.stride);
    grid.windows.reserve(rows.size() * cols.size());
    for (const std::size_t r : rows)
        for (const std::size_t c : cols) grid.windows.emplace_back(r, c);
    return grid;
}

WindowGrid enumerate_windows(const RangeImage& image, std::size_t omega) {
    return enumerate_windows(image.height, image.width, omega);
}

std::uint64_t models_per_window(std::uint32_t s_bits, std::uint64_t budget_bytes,
                                double delta, double k) {
    if (s_bits == 0 || budget_bytes == 0 || !(delta > 0.0) || !(k > 0.0))
        throw std::invalid_argument("models_per_window arguments must be positive");
    const double entry_bytes = s_bits / 8.0;
    const double window_entries = (delta / k) * (delta / k);
    const double window_count = (2.0 * k - 1.0) * (2.0 * k - 1.0);
    const double per_model = entry_bytes * window_entries * window_count;
    return static_cast<std::uint64_t>(std::floor(static_cast<double>(budget_bytes) / per_model));
}

namespace {

using RowMajor3 = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

// Signed orthogonal residuals against the total least squares plane (the
// centroid plus the smallest covariance eigenvector).
std::vector<double> plane_residuals(const RowMajor3& m) {
    const Eigen::RowVector3d centroid = m.colwise().mean();
    const RowMajor3 centered = m.rowwise() - centroid;
    const Eigen::Matrix3d cov = centered.transpose() * centered;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    const Eigen::Vector3d normal = solver.eigenvectors().col(0); // smallest eigenvalue

    std::vector<double> residuals(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        residuals[static_cast<std::size_t>(i)] = centered.row(i).dot(normal);
    return residuals;
}

} // namespace

double estimate_window_sigma(const Matrix& points) {
    if (points.cols() != 3)
        throw std::invalid_argument("sigma estimate expects 3D points");
    if (points.rows() < 3)
        throw std::invalid_argument("sigma estimate needs at least 3 points");

    Eigen::Map<const RowMajor3> m(points.data().data(),
                                  static_cast<Eigen::Index>(points.rows()), 3);
    const std::size_t n = points.rows();
    const std::size_t h = n / 2 + 1;

    // A deep defect drags the least squares plane toward itself and biases
    // both the fit and any zero-centered scale, so the plane itself has to
    // be found robustly. Minimal three-point planes are scored by the h-th
    // smallest absolute residual with h a strict majority: a plane through
    // defect pixels leaves the clean majority far away and loses to a plane
    // through clean pixels, for anything short of half the window defective.
    Rng rng(0x900dbeefcafe5eedull); // fixed, the estimate is a pure function of the window
    Eigen::Vector3d best_normal = Eigen::Vector3d::Zero();
    double best_offset = 0.0;
    double best_value = std::numeric_limits<double>::infinity();
    std::vector<double> scratch(n);
    for (int trial = 0; trial < 64; ++trial) {
        const auto pick = sample_without_replacement(rng, static_cast<std::uint32_t>(n), 3);
        const Eigen::Vector3d a = m.row(pick[0]).transpose();
        const Eigen::Vector3d ab = m.row(pick[1]).transpose() - a;
        const Eigen::Vector3d ac = m.row(pick[2]).transpose() - a;
        const Eigen::Vector3d cross = ab.cross(ac);
        const double len = cross.norm();
        if (len == 0.0) continue; // collinear sample
        const Eigen::Vector3d normal = cross / len;
        const double offset = normal.dot(a);
        for (std::size_t i = 0; i < n; ++i)
            scratch[i] = std::abs(m.row(static_cast<Eigen::Index>(i)).dot(normal) - offset);
        std::nth_element(scratch.begin(), scratch.begin() + (h - 1), scratch.end());
        if (scratch[h - 1] < best_value) {
            best_value = scratch[h - 1];
            best_normal = normal;
            best_offset = offset;
        }
    }

    std::vector<Eigen::Index> inliers;
    if (best_value < std::numeric_limits<double>::infinity()) {
        // Rousseeuw's finite sample correction keeps the preliminary scale
        // honest for small windows; the sample points themselves always pass
        // the cut, so at least three inliers survive.
        const double prelim =
            n > 3 ? 1.4826 * (1.0 + 5.0 / static_cast<double>(n - 3)) * best_value : 0.0;
        const double cut = 3.0 * std::max(prelim, 1e-12);
        for (std::size_t i = 0; i < n; ++i) {
            const Eigen::Index row = static_cast<Eigen::Index>(i);
            if (std::abs(m.row(row).dot(best_normal) - best_offset) <= cut)
                inliers.push_back(row);
        }
    }

    // The trimmed set gets a final total least squares fit and a MAD scale.
    // Falling back to the whole window only happens when every trial drew a
    // collinear triple, which leaves nothing better to trim against.
    RowMajor3 kept;
    if (inliers.size() >= 3) {
        kept.resize(static_cast<Eigen::Index>(inliers.size()), 3);
        for (std::size_t i = 0; i < inliers.size(); ++i)
            kept.row(static_cast<Eigen::Index>(i)) = m.row(inliers[i]);
    } else {
        kept = m;
    }
    const std::vector<double> refit = plane_residuals(kept);
    std::vector<double> centered = refit;
    const double med = median_of(centered);
    for (std::size_t i = 0; i < refit.size(); ++i) centered[i] = std::abs(refit[i] - med);
    const double scale = 1.4826 * median_of(centered);
    return std::max(scale, 1e-12);
}

std::vector<double> sliding_pif(const RangeImage& image, const ModelFamily& family,
                                const SlidingPifParams& params, SlidingPifStats* stats) {
    if (family.ambient_dim() != 3)
        throw std::invalid_argument("sliding windows need a 3D model family");
    if (params.trees == 0) throw std::invalid_argument("trees must be positive");
    if (params.branching < 2 || params.branching > 256)
        throw std::invalid_argument("branching must be in [2, 256]");
    if (params.subsample < params.branching)
        throw std::invalid_argument("subsample must be at least the branching factor");
    if (!(params.k_multiplier > 0.0))
        throw std::invalid_argument("k_multiplier must be positive");
    if (params.sigma_override && !(*params.sigma_override > 0.0))
        throw std::invalid_argument("sigma override must be positive");

    const WindowGrid grid = enumerate_windows(image, params.omega);
    const std::size_t window_count = grid.windows.size();
    const double window_capacity =
        static_cast<double>(params.omega) * static_cast<double>(params.omega);
    const double per_model_bytes =
        (params.s_bits / 8.0) * window_capacity * static_cast<double>(window_count);
    if (params.s_bits == 0 || per_model_bytes <= 0.0)
        throw std::invalid_argument("entry size must be positive");
    const auto m_per_window = static_cast<std::uint64_t>(
        std::floor(static_cast<double>(params.budget_bytes) / per_model_bytes));
    if (m_per_window == 0)
        throw std::invalid_argument("memory budget admits no models per window");

    const auto min_sample = static_cast<std::size_t>(family.min_sample_size());
    std::vector<WindowResult> results(window_count);

    const auto process = [&](std::size_t w) {
        WindowResult& res = results[w];
        const auto [row0, col0] = grid.windows[w];
        const std::size_t row_end = std::min(row0 + params.omega, image.height);
        const std::size_t col_end = std::min(col0 + params.omega, image.width);
        for (std::size_t r = row0; r < row_end; ++r)
            for (std::size_t c = col0; c < col_end; ++c)
                if (image.is_valid(r, c)) res.pixels.push_back(image.index(r, c));
        if (res.pixels.size() < min_sample) {
            res.skipped = true;
            res.pixels.clear();
            return;
        }

        Matrix x(res.pixels.size(), 3);
        for (std::size_t i = 0; i < res.pixels.size(); ++i) {
            const double* p = image.xyz.data() + 3 * res.pixels[i];
            x.at(i, 0) = p[0];
            x.at(i, 1) = p[1];
            x.at(i, 2) = p[2];
        }

        PreferenceConfig config;
        config.sigma = params.sigma_override ? *params.sigma_override : estimate_window_sigma(x);
        config.k_multiplier = params.k_multiplier;
        config.mode = params.mode;

        const auto models = sample_models(x, family, m_per_window,
                                          derive_seed(params.seed, 2 * w), nullptr);
        const Matrix prefs = embed(x, models, config);

        RzHashForestParams forest_params;
        forest_params.trees = params.trees;
        forest_params.subsample = params.subsample;
        forest_params.branching = params.branching;
        forest_params.seed = derive_seed(params.seed, 2 * w + 1);
        forest_params.logb_norm = params.logb_norm;
        const RzHashForest forest(prefs, forest_params);
        res.scores = forest.anomaly_scores(prefs);
        res.matrix_bytes = x.bytes() + prefs.bytes();
    };

    // Windows run in parallel, but only in batches small enough that the
    // concurrent matrices stay within one window of the budget.
    const double batch_bytes =
        8.0 * window_capacity * (static_cast<double>(m_per_window) + 3.0);
    auto batch = static_cast<std::size_t>(
        static_cast<double>(params.budget_bytes) / batch_bytes) + 1;
    for (std::size_t start = 0; start < window_count; start += batch) {
        const std::size_t count = std::min(batch, window_count - start);
        parallel_for(count, [&](std::size_t i) { process(start + i); });
    }

    std::vector<double> sum(image.pixels(), 0.0);
    std::vector<std::uint32_t> hits(image.pixels(), 0);
    std::size_t skipped = 0;
    std::int64_t max_window_bytes = 0;
    for (const WindowResult& res : results) {
        if (res.skipped) {
            ++skipped;
            continue;
        }
        max_window_bytes = std::max(max_window_bytes, res.matrix_bytes);
        for (std::size_t i = 0; i < res.pixels.size(); ++i) {
            sum[res.pixels[i]] += res.scores[i];
            hits[res.pixels[i]] += 1;
        }
    }

    std::vector<double> map(image.pixels(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < map.size(); ++i)
        if (hits[i] > 0) map[i] = sum[i] / hits[i];

    if (stats != nullptr) {
        stats->windows_total = window_count;
        stats->windows_skipped = skipped;
        stats->models_per_window = m_per_window;
        stats->max_window_bytes = max_window_bytes;
    }
    return map;
}

void write_score_map_csv(const std::string& path, const RangeImage& image,
                         const std::vector<double>& map) {
    if (map.size() != image.pixels())
        throw std::invalid_argument("score map size does not match the image");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "row,col,score\n";
    for (std::size_t r = 0; r < image.height; ++r)
        for (std::size_t c = 0; c < image.width; ++c)
            out << r << ',' << c << ',' << format_g9(map[image.index(r, c)]) << '\n';
    if (!out) throw IoError("failed writing " + path);
}

} // namespace isoprefs
