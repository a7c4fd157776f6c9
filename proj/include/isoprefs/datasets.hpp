#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "isoprefs/dataset.hpp"
#include "isoprefs/range_image.hpp"

// Seeded synthetic benchmarks: 2D primitive arrangements for the preference
// engines, noisy surface grids for the sliding window engine, and cluster
// streams for the online engine. Geometry lives on the unit square/cube with
// a primitive noise sigma of 0.0035, small against the structure spacing;
// the generated dataset records it in noise_sigma so scoring pipelines can
// match their preference bandwidth to the data.

namespace isoprefs {

enum class PrimitiveKind { stair3, stair4, star5, star11, circle3, circle4, circle5 };

PrimitiveKind primitive_from_name(std::string_view name);
const char* primitive_name(PrimitiveKind kind);

// Canonical arrangements: stairK is a staircase of K alternating axis-aligned
// segments, starK is K length-1 lines through (0.5, 0.5) at equal angles,
// circleK is K radius-0.15 circles with centers on a ring of radius 0.3.
// Every structure carries 50 points, except stair3/circle3 which use the
// unbalanced 70/50/30 split. Anomalies are sampled uniformly over the
// bounding box of the noisy genuine points, exactly one per genuine point.
// `scale` multiplies all per-structure counts for timing experiments.
LabeledDataset generate_primitive_2d(PrimitiveKind kind, std::uint64_t seed,
                                     std::uint32_t scale = 1);

enum class SurfaceShape { plane, paraboloid, sphere_cap };

SurfaceShape surface_from_name(std::string_view name);
const char* surface_name(SurfaceShape shape);

struct SurfaceDefect {
    std::size_t row = 0; // pit center, pixels
    std::size_t col = 0;
    double radius_px = 8.0;
    double depth_sigmas = 10.0; // pit depth in multiples of the noise sigma
};

// side x side grid over the unit square with Gaussian z-noise. The defect
// carves a quartic-profile pit and sets the ground-truth mask on every pixel
// within radius_px (even at depth 0, which serves as a negative control).
RangeImage generate_surface_grid(SurfaceShape shape, std::size_t side, double sigma,
                                 const std::optional<SurfaceDefect>& defect, std::uint64_t seed);

struct StreamCluster {
    std::vector<double> mean;
    double scale = 1.0; // isotropic standard deviation
    double weight = 1.0;
};

struct StreamSpec {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<StreamCluster> clusters;
    double anomaly_rate = 0.0;
    // (first point index using the new set, replacement cluster set)
    std::vector<std::pair<std::size_t, std::vector<StreamCluster>>> drift;
};

// Points in stream order: genuine draws from the active cluster mixture,
// anomalies uniform over an inflated bounding box of all cluster sets.
LabeledDataset generate_stream(const StreamSpec& spec, std::uint64_t seed);

} // namespace isoprefs
