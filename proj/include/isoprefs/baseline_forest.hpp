#pragma once

#include <cstdint>
#include <vector>

#include "isoprefs/matrix.hpp"

// Classic axis-parallel isolation forest, kept as the comparison baseline for
// both ambient points and preference rows.

namespace isoprefs {

struct BaselineNode {
    std::int32_t dim = -1; // -1 marks a leaf
    double split = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t size = 0;
    bool leaf() const { return dim < 0; }
};

struct BaselineTree {
    std::vector<BaselineNode> nodes; // nodes[0] is the root
};

struct BaselineForestParams {
    std::uint32_t trees = 100;
    std::uint32_t subsample = 256;
    std::uint64_t seed = 0;
};

class BaselineForest {
public:
    BaselineForest(const Matrix& data, const BaselineForestParams& params);

    const BaselineForestParams& params() const { return params_; }
    std::uint32_t psi_eff() const { return psi_eff_; }
    int depth_limit() const { return depth_limit_; }
    const std::vector<BaselineTree>& trees() const { return trees_; }

    double score_norm() const;
    double tree_path_length(std::size_t tree, PointRef q) const;
    std::vector<double> average_depths(const Matrix& queries) const;
    std::vector<double> anomaly_scores(const Matrix& queries) const;
    std::vector<std::size_t> leaf_depth_histogram() const;

private:
    BaselineForestParams params_;
    std::uint32_t psi_eff_ = 0;
    int depth_limit_ = 0;
    std::size_t dims_ = 0;
    std::vector<BaselineTree> trees_;
};

// Convenience wrapper: build on X and score every row of X.
std::vector<double> baseline_iforest(const Matrix& x, std::uint32_t trees, std::uint32_t psi,
                                     std::uint64_t seed);

} // namespace isoprefs
