#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "isoprefs/matrix.hpp"
#include "isoprefs/rng.hpp"

// Locality-sensitive hashing for the Ruzicka distance, and the isolation
// forest built on it. Two vectors collide under one hash draw with
// probability 1 - d_R(p, q), so hash-bucket splits approximate Voronoi cells
// without ever computing a pairwise distance.

namespace isoprefs {

struct RuzHashParams {
    std::vector<double> tau;       // per-coordinate activation thresholds, U[0,1)
    std::vector<std::uint32_t> pi; // permutation of {1..m}, the rank of each coordinate
    std::vector<std::uint16_t> beta; // optional bucket map {1..b} per rank; empty if unused
};

// Thresholds and permutation only (raw hash with values in {1..m}).
RuzHashParams sample_ruzhash_params(Rng& rng, std::size_t dims);
// Adds the rank-to-bucket map for aggregation into b buckets.
RuzHashParams sample_ruzhash_params(Rng& rng, std::size_t dims, std::uint32_t buckets);

// Smallest rank among active coordinates (p[i] > tau[i]); empty when none are.
std::optional<std::uint32_t> ruzhash(PointRef p, const RuzHashParams& params);
// Raw hash pushed through beta; in {1..b}, empty propagates.
std::optional<std::uint32_t> ruzhash_aggregated(PointRef p, const RuzHashParams& params);

// 0-based child slot used by the trees: aggregated hash minus one, with empty
// activations folded into the first bucket.
std::uint32_t rz_bucket(PointRef p, const RuzHashParams& params);

// Monte-Carlo collision frequency over `trials` fresh parameter draws.
// Unaggregated (no bucket count) compares raw hashes; with `buckets` set it
// compares bucket slots under the same fold-empty-into-first convention the
// trees use.
double estimate_collision(PointRef p, PointRef q, std::optional<std::uint32_t> buckets,
                          std::uint32_t trials, std::uint64_t seed);

struct RzNode {
    RuzHashParams params;               // internal nodes only
    std::vector<std::int32_t> children; // one per bucket; empty marks a leaf
    std::uint32_t size = 0;             // build points that reached this node
    bool leaf() const { return children.empty(); }
};

struct RzTree {
    std::vector<RzNode> nodes; // nodes[0] is the root
};

// Grows one tree: every internal node draws fresh (tau, pi, beta) and routes
// its points in a single pass over their coordinates. No distances anywhere.
RzTree build_rzhash_tree(const Matrix& data, std::vector<std::uint32_t> rows,
                         std::uint32_t branching, int depth_limit, Rng& rng);

double path_length(PointRef p, const RzTree& tree);

struct RzHashForestParams {
    std::uint32_t trees = 100;
    std::uint32_t subsample = 256; // points per tree (psi), clamped to the data size
    std::uint32_t branching = 2;   // buckets per split (b), at most 256
    std::uint64_t seed = 0;
    bool logb_norm = false; // normalize scores by log_b(psi) instead of c(psi)
};

class RzHashForest {
public:
    RzHashForest(const Matrix& data, const RzHashForestParams& params);

    const RzHashForestParams& params() const { return params_; }
    std::uint32_t psi_eff() const { return psi_eff_; }
    int depth_limit() const { return depth_limit_; }
    const std::vector<RzTree>& trees() const { return trees_; }

    double score_norm() const;
    std::vector<double> average_depths(const Matrix& queries) const;
    std::vector<double> anomaly_scores(const Matrix& queries) const;
    std::vector<std::size_t> leaf_depth_histogram() const;

private:
    RzHashForestParams params_;
    std::uint32_t psi_eff_ = 0;
    int depth_limit_ = 0;
    std::size_t dims_ = 0;
    std::vector<RzTree> trees_;
};

} // namespace isoprefs
