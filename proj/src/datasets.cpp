#include "isoprefs/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "isoprefs/common.hpp"
#include "isoprefs/rng.hpp"

namespace isoprefs {

namespace {

// Unit-scale structures with sigma much smaller than the gaps between them.
// Two effects cap the reachable ROC AUC when sigma grows: the 3-sigma inlier
// bands around the structures swallow a growing share of the uniform
// anomalies (at sigma 0.02 roughly half of them), and minimal-sample circle
// fits wobble with the noise, so small structures never accumulate clean
// model support and their points score like anomalies. 0.0035 keeps both
// effects in the few-percent range.
constexpr double kPrimitiveSigma = 0.0035;

struct Segment {
    double x0, y0, x1, y1;
};

std::vector<Segment> stair_segments(int steps) {
    const int horizontals = (steps + 1) / 2;
    const double len = 1.0 / static_cast<double>(horizontals);
    std::vector<Segment> segments;
    double x = 0.0, y = 0.0;
    for (int i = 0; i < steps; ++i) {
        if (i % 2 == 0) {
            segments.push_back({x, y, x + len, y});
            x += len;
        } else {
            segments.push_back({x, y, x, y + len});
            y += len;
        }
    }
    return segments;
}

std::vector<int> structure_counts(PrimitiveKind kind, int structures) {
    if (kind == PrimitiveKind::stair3 || kind == PrimitiveKind::circle3) return {70, 50, 30};
    return std::vector<int>(structures, 50);
}

int structure_count(PrimitiveKind kind) {
    switch (kind) {
        case PrimitiveKind::stair3: return 3;
        case PrimitiveKind::stair4: return 4;
        case PrimitiveKind::star5: return 5;
        case PrimitiveKind::star11: return 11;
        case PrimitiveKind::circle3: return 3;
        case PrimitiveKind::circle4: return 4;
        case PrimitiveKind::circle5: return 5;
    }
    return 0;
}

} // namespace

PrimitiveKind primitive_from_name(std::string_view name) {
    if (name == "stair3") return PrimitiveKind::stair3;
    if (name == "stair4") return PrimitiveKind::stair4;
    if (name == "star5") return PrimitiveKind::star5;
    if (name == "star11") return PrimitiveKind::star11;
    if (name == "circle3") return PrimitiveKind::circle3;
    if (name == "circle4") return PrimitiveKind::circle4;
    if (name == "circle5") return PrimitiveKind::circle5;
    throw IoError("unknown primitive dataset: " + std::string(name));
}

const char* primitive_name(PrimitiveKind kind) {
    switch (kind) {
        case PrimitiveKind::stair3: return "stair3";
        case PrimitiveKind::stair4: return "stair4";
        case PrimitiveKind::star5: return "star5";
        case PrimitiveKind::star11: return "star11";
        case PrimitiveKind::circle3: return "circle3";
        case PrimitiveKind::circle4: return "circle4";
        case PrimitiveKind::circle5: return "circle5";
    }
    return "?";
}

LabeledDataset generate_primitive_2d(PrimitiveKind kind, std::uint64_t seed,
                                     std::uint32_t scale) {
    if (scale == 0) throw std::invalid_argument("generate_primitive_2d: scale must be >= 1");
    const int structures = structure_count(kind);
    std::vector<int> counts = structure_counts(kind, structures);
    for (int& c : counts) c *= static_cast<int>(scale);
    const int genuine = std::accumulate(counts.begin(), counts.end(), 0);

    Rng rng(seed);
    LabeledDataset data;
    data.points = Matrix(static_cast<std::size_t>(2 * genuine), 2);
    data.labels.assign(static_cast<std::size_t>(2 * genuine), 0);
    data.structure.assign(static_cast<std::size_t>(2 * genuine), -1);
    data.noise_sigma = kPrimitiveSigma;

    std::size_t row = 0;
    const bool is_stair = kind == PrimitiveKind::stair3 || kind == PrimitiveKind::stair4;
    const bool is_star = kind == PrimitiveKind::star5 || kind == PrimitiveKind::star11;
    const std::vector<Segment> stairs = is_stair ? stair_segments(structures) : std::vector<Segment>{};

    for (int s = 0; s < structures; ++s) {
        for (int i = 0; i < counts[s]; ++i, ++row) {
            double x, y;
            if (is_stair) {
                const Segment& seg = stairs[s];
                const double t = uniform01(rng);
                x = seg.x0 + t * (seg.x1 - seg.x0);
                y = seg.y0 + t * (seg.y1 - seg.y0);
            } else if (is_star) {
                const double angle = std::numbers::pi * static_cast<double>(s) / structures;
                const double t = uniform01(rng) - 0.5;
                x = 0.5 + t * std::cos(angle);
                y = 0.5 + t * std::sin(angle);
            } else {
                // Ring radius 0.3 with circle radius 0.15 keeps even five
                // circles disjoint: adjacent centers sit 0.35 apart.
                const double around = 2.0 * std::numbers::pi * static_cast<double>(s) / structures;
                const double cx = 0.5 + 0.3 * std::cos(around);
                const double cy = 0.5 + 0.3 * std::sin(around);
                const double phi = 2.0 * std::numbers::pi * uniform01(rng);
                x = cx + 0.15 * std::cos(phi);
                y = cy + 0.15 * std::sin(phi);
            }
            data.points.at(row, 0) = x + kPrimitiveSigma * gaussian(rng);
            data.points.at(row, 1) = y + kPrimitiveSigma * gaussian(rng);
            data.structure[row] = s + 1;
        }
    }

    double lo_x = data.points.at(0, 0), hi_x = lo_x;
    double lo_y = data.points.at(0, 1), hi_y = lo_y;
    for (std::size_t r = 1; r < row; ++r) {
        lo_x = std::min(lo_x, data.points.at(r, 0));
        hi_x = std::max(hi_x, data.points.at(r, 0));
        lo_y = std::min(lo_y, data.points.at(r, 1));
        hi_y = std::max(hi_y, data.points.at(r, 1));
    }

    for (int i = 0; i < genuine; ++i, ++row) {
        data.points.at(row, 0) = lo_x + uniform01(rng) * (hi_x - lo_x);
        data.points.at(row, 1) = lo_y + uniform01(rng) * (hi_y - lo_y);
        data.labels[row] = 1;
    }
    return data;
}

SurfaceShape surface_from_name(std::string_view name) {
    if (name == "plane") return SurfaceShape::plane;
    if (name == "paraboloid") return SurfaceShape::paraboloid;
    if (name == "sphere_cap") return SurfaceShape::sphere_cap;
    throw IoError("unknown surface shape: " + std::string(name));
}

const char* surface_name(SurfaceShape shape) {
    switch (shape) {
        case SurfaceShape::plane: return "plane";
        case SurfaceShape::paraboloid: return "paraboloid";
        case SurfaceShape::sphere_cap: return "sphere_cap";
    }
    return "?";
}

RangeImage generate_surface_grid(SurfaceShape shape, std::size_t side, double sigma,
                                 const std::optional<SurfaceDefect>& defect,
                                 std::uint64_t seed) {
    if (side < 16) throw std::invalid_argument("generate_surface_grid: side must be >= 16");
    if (sigma < 0.0) throw std::invalid_argument("generate_surface_grid: sigma must be >= 0");

    Rng rng(seed);
    RangeImage image(side, side);
    if (defect) image.gt_mask.assign(image.pixels(), 0);

    const double step = 1.0 / static_cast<double>(side - 1);
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) {
            const double u = static_cast<double>(c) * step;
            const double v = static_cast<double>(r) * step;
            double z = 0.0;
            switch (shape) {
                case SurfaceShape::plane:
                    z = 0.1 + 0.15 * u + 0.25 * v;
                    break;
                case SurfaceShape::paraboloid:
                    z = (u - 0.5) * (u - 0.5) + (v - 0.5) * (v - 0.5);
                    break;
                case SurfaceShape::sphere_cap: {
                    const double du = u - 0.5, dv = v - 0.5;
                    z = -1.2 + std::sqrt(1.4 * 1.4 - du * du - dv * dv);
                    break;
                }
            }
            z += sigma * gaussian(rng);

            if (defect) {
                const double dr = static_cast<double>(r) - static_cast<double>(defect->row);
                const double dc = static_cast<double>(c) - static_cast<double>(defect->col);
                const double dist = std::sqrt(dr * dr + dc * dc);
                if (dist <= defect->radius_px) {
                    const double frac = dist / defect->radius_px;
                    z -= defect->depth_sigmas * sigma * (1.0 - frac * frac * frac * frac);
                    image.gt_mask[image.index(r, c)] = 1;
                }
            }

            double* p = image.point(r, c);
            p[0] = u;
            p[1] = v;
            p[2] = z;
        }
    }
    return image;
}

namespace {

void validate_clusters(const std::vector<StreamCluster>& clusters, std::size_t d) {
    if (clusters.empty()) throw std::invalid_argument("stream spec: no clusters");
    double total = 0.0;
    for (const StreamCluster& c : clusters) {
        if (c.mean.size() != d)
            throw std::invalid_argument("stream spec: cluster mean dimension mismatch");
        if (c.scale < 0.0) throw std::invalid_argument("stream spec: negative cluster scale");
        if (c.weight < 0.0) throw std::invalid_argument("stream spec: negative cluster weight");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("stream spec: cluster weights must sum to 1");
}

} // namespace

LabeledDataset generate_stream(const StreamSpec& spec, std::uint64_t seed) {
    if (spec.n == 0 || spec.d == 0) throw std::invalid_argument("stream spec: empty stream");
    if (spec.anomaly_rate < 0.0 || spec.anomaly_rate >= 0.5)
        throw std::invalid_argument("stream spec: anomaly rate must be in [0, 0.5)");
    validate_clusters(spec.clusters, spec.d);
    for (std::size_t e = 0; e < spec.drift.size(); ++e) {
        validate_clusters(spec.drift[e].second, spec.d);
        if (spec.drift[e].first >= spec.n)
            throw std::invalid_argument("stream spec: drift index past the stream");
        if (e > 0 && spec.drift[e].first <= spec.drift[e - 1].first)
            throw std::invalid_argument("stream spec: drift indices must increase");
    }

    // Bounding box over every cluster set, +-3 sigma, inflated by 1.5x about
    // its center, so anomalies land outside the bulk of every regime.
    std::vector<double> lo(spec.d, std::numeric_limits<double>::infinity());
    std::vector<double> hi(spec.d, -std::numeric_limits<double>::infinity());
    auto absorb = [&](const std::vector<StreamCluster>& set) {
        for (const StreamCluster& c : set)
            for (std::size_t a = 0; a < spec.d; ++a) {
                lo[a] = std::min(lo[a], c.mean[a] - 3.0 * c.scale);
                hi[a] = std::max(hi[a], c.mean[a] + 3.0 * c.scale);
            }
    };
    absorb(spec.clusters);
    for (const auto& [at, set] : spec.drift) absorb(set);
    for (std::size_t a = 0; a < spec.d; ++a) {
        const double center = 0.5 * (lo[a] + hi[a]);
        const double half = 0.75 * (hi[a] - lo[a]); // 1.5x the original half-width
        lo[a] = center - half;
        hi[a] = center + half;
    }

    Rng rng(seed);
    LabeledDataset data;
    data.points = Matrix(spec.n, spec.d);
    data.labels.assign(spec.n, 0);
    data.structure.assign(spec.n, -1);
    data.noise_sigma = 0.0;

    const std::vector<StreamCluster>* active = &spec.clusters;
    std::size_t next_drift = 0;
    for (std::size_t i = 0; i < spec.n; ++i) {
        if (next_drift < spec.drift.size() && i >= spec.drift[next_drift].first) {
            active = &spec.drift[next_drift].second;
            ++next_drift;
        }
        if (uniform01(rng) < spec.anomaly_rate) {
            for (std::size_t a = 0; a < spec.d; ++a)
                data.points.at(i, a) = lo[a] + uniform01(rng) * (hi[a] - lo[a]);
            data.labels[i] = 1;
            continue;
        }
        const double pick = uniform01(rng);
        double cumulative = 0.0;
        std::size_t chosen = active->size() - 1;
        for (std::size_t c = 0; c < active->size(); ++c) {
            cumulative += (*active)[c].weight;
            if (pick < cumulative) {
                chosen = c;
                break;
            }
        }
        const StreamCluster& cluster = (*active)[chosen];
        for (std::size_t a = 0; a < spec.d; ++a)
            data.points.at(i, a) = cluster.mean[a] + cluster.scale * gaussian(rng);
        data.structure[i] = static_cast<int>(chosen) + 1;
    }
    return data;
}

} // namespace isoprefs
