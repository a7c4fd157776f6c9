#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "isoprefs/geometry.hpp"
#include "isoprefs/matrix.hpp"

namespace isoprefs {

enum class PreferenceMode { continuous, binary };

struct PreferenceConfig {
    double sigma = 0.02;       // noise scale of the data
    double k_multiplier = 3.0; // inlier threshold epsilon = k * sigma
    PreferenceMode mode = PreferenceMode::continuous;

    double epsilon() const { return k_multiplier * sigma; }
};

// phi(delta): 0 beyond epsilon, else exp(-delta^2 / (2 sigma^2)) or a hard 1
// in binary mode.
double preference_value(double delta, const PreferenceConfig& config);

// n x m preference matrix; entry (j,i) scores point j against model i.
// Rows are independent, so the fill parallelizes over points.
Matrix embed(const Matrix& points, std::span<const ModelInstance> models,
             const PreferenceConfig& config);

// Distances on preference vectors. All three are metrics with range [0,1].
// For a pair of all-zero vectors they return 0; an all-zero vector is at
// distance 1 from any nonzero vector. Jaccard treats any nonzero entry as
// active. Each call bumps the instrumentation distance counter.
double jaccard(PointRef p, PointRef q);
double ruzicka(PointRef p, PointRef q);
double tanimoto(PointRef p, PointRef q);

enum class Metric { jaccard, ruzicka, tanimoto, euclidean };

Metric metric_from_name(std::string_view name);
const char* metric_name(Metric metric);
double metric_distance(Metric metric, PointRef p, PointRef q);

void write_preference_csv(const std::string& path, const Matrix& prefs);

} // namespace isoprefs
