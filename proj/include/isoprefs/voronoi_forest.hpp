#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "isoprefs/matrix.hpp"
#include "isoprefs/preference.hpp"
#include "isoprefs/rng.hpp"

// Voronoi isolation forest: trees partition space by nearest-seed cells under
// an arbitrary metric, so they work directly on preference vectors where
// axis-aligned splits make no sense.

namespace isoprefs {

struct VoronoiNode {
    std::vector<std::uint32_t> seeds;   // data row ids; empty marks a leaf
    std::vector<std::int32_t> children; // parallel to seeds
    std::uint32_t size = 0;             // build points that reached this node
    bool leaf() const { return seeds.empty(); }
};

struct VoronoiTree {
    std::vector<VoronoiNode> nodes; // nodes[0] is the root
};

// Grows one tree over the given data rows. Recursion stops at the depth
// limit, when fewer than `branching` points remain, or when a split fails to
// separate anything (all points tied to one seed), which otherwise happens
// forever on duplicated points.
VoronoiTree build_voronoi_tree(const Matrix& data, std::vector<std::uint32_t> rows,
                               std::uint32_t branching, int depth_limit, Metric metric,
                               Rng& rng);

// Depth of the leaf q falls into, plus the c(leaf size) tail adjustment.
// Ties on seed distance go to the lowest seed index, as in the builder.
double path_length(PointRef q, const VoronoiTree& tree, const Matrix& data, Metric metric);

struct VoronoiForestParams {
    std::uint32_t trees = 100;
    std::uint32_t subsample = 256; // points per tree (psi), clamped to the data size
    std::uint32_t branching = 2;   // seeds per split (b)
    Metric metric = Metric::tanimoto;
    std::uint64_t seed = 0;
    bool logb_norm = false; // normalize scores by log_b(psi) instead of c(psi)
};

class VoronoiForest {
public:
    VoronoiForest(std::shared_ptr<const Matrix> data, const VoronoiForestParams& params);

    const VoronoiForestParams& params() const { return params_; }
    std::uint32_t psi_eff() const { return psi_eff_; }
    int depth_limit() const { return depth_limit_; }
    const std::vector<VoronoiTree>& trees() const { return trees_; }
    const Matrix& data() const { return *data_; }

    // Denominator of the score exponent for this forest's configuration.
    double score_norm() const;

    double tree_path_length(std::size_t tree, PointRef q) const;
    std::vector<double> average_depths(const Matrix& queries) const;
    // 2^(-E[depth]/norm), one value per query row, higher = more anomalous.
    std::vector<double> anomaly_scores(const Matrix& queries) const;
    // Leaf counts per depth across all trees, indexed 0..depth_limit.
    std::vector<std::size_t> leaf_depth_histogram() const;

private:
    double seed_distance(PointRef q, double qnorm2, std::uint32_t row) const;

    VoronoiForestParams params_;
    std::uint32_t psi_eff_ = 0;
    int depth_limit_ = 0;
    std::shared_ptr<const Matrix> data_;
    std::vector<double> row_norm2_; // cached for the tanimoto fast path
    std::vector<VoronoiTree> trees_;
};

} // namespace isoprefs
