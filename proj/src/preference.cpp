#include "isoprefs/preference.hpp"

#include <cmath>
#include <fstream>

#include "isoprefs/common.hpp"
#include "isoprefs/dataset.hpp"
#include "isoprefs/detail/accum.hpp"
#include "isoprefs/parallel.hpp"

namespace isoprefs {

double preference_value(double delta, const PreferenceConfig& config) {
    delta = std::abs(delta);
    if (delta > config.epsilon()) return 0.0;
    if (config.mode == PreferenceMode::binary) return 1.0;
    if (delta == 0.0) return 1.0;
    const double z = delta / config.sigma;
    return std::exp(-0.5 * z * z);
}

Matrix embed(const Matrix& points, std::span<const ModelInstance> models,
             const PreferenceConfig& config) {
    Matrix prefs(points.rows(), models.size());
    parallel_for(points.rows(), [&](std::size_t j) {
        const PointRef x = points.row(j);
        auto row = prefs.row(j);
        for (std::size_t i = 0; i < models.size(); ++i)
            row[i] = preference_value(residual(models[i], x), config);
    });
    return prefs;
}

namespace {

void require_same_length(PointRef p, PointRef q) {
    if (p.size() != q.size())
        throw LengthMismatch("preference distance: vector lengths differ");
}

} // namespace

double jaccard(PointRef p, PointRef q) {
    require_same_length(p, q);
    instrument::count_distance_call();
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const bool a = p[i] != 0.0, b = q[i] != 0.0;
        inter += a && b;
        uni += a || b;
    }
    if (uni == 0) return 0.0;
    return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

double ruzicka(PointRef p, PointRef q) {
    require_same_length(p, q);
    instrument::count_distance_call();
    const auto s = detail::lane_minmax(p.data(), q.data(), p.size());
    if (s.smax == 0.0) return 0.0;
    return 1.0 - s.smin / s.smax;
}

double tanimoto(PointRef p, PointRef q) {
    require_same_length(p, q);
    instrument::count_distance_call();
    const double dot = detail::lane_dot(p.data(), q.data(), p.size());
    const double np = detail::lane_norm2(p.data(), p.size());
    const double nq = detail::lane_norm2(q.data(), q.size());
    const double denom = np + nq - dot;
    if (denom <= 0.0) return 0.0; // only when both vectors are all-zero
    return 1.0 - dot / denom;
}

Metric metric_from_name(std::string_view name) {
    if (name == "jaccard") return Metric::jaccard;
    if (name == "ruzicka") return Metric::ruzicka;
    if (name == "tanimoto") return Metric::tanimoto;
    if (name == "euclidean" || name == "l2") return Metric::euclidean;
    throw IoError("unknown metric: " + std::string(name));
}

const char* metric_name(Metric metric) {
    switch (metric) {
        case Metric::jaccard: return "jaccard";
        case Metric::ruzicka: return "ruzicka";
        case Metric::tanimoto: return "tanimoto";
        case Metric::euclidean: return "euclidean";
    }
    return "?";
}

double metric_distance(Metric metric, PointRef p, PointRef q) {
    switch (metric) {
        case Metric::jaccard: return jaccard(p, q);
        case Metric::ruzicka: return ruzicka(p, q);
        case Metric::tanimoto: return tanimoto(p, q);
        case Metric::euclidean: {
            require_same_length(p, q);
            instrument::count_distance_call();
            return std::sqrt(detail::lane_sqdist(p.data(), q.data(), p.size()));
        }
    }
    return 0.0;
}

void write_preference_csv(const std::string& path, const Matrix& prefs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (std::size_t r = 0; r < prefs.rows(); ++r) {
        auto row = prefs.row(r);
        for (std::size_t c = 0; c < prefs.cols(); ++c) {
            if (c) out << ",";
            out << format_g9(row[c]);
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

} // namespace isoprefs
