#include "isoprefs/baseline_forest.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "isoprefs/common.hpp"
#include "isoprefs/forest_common.hpp"
#include "isoprefs/parallel.hpp"
#include "isoprefs/rng.hpp"

namespace isoprefs {

namespace {

struct TreeBuilder {
    const Matrix& data;
    int depth_limit;
    Rng& rng;
    BaselineTree tree;

    std::pair<double, double> column_range(const std::vector<std::uint32_t>& rows,
                                           std::size_t dim) const {
        double lo = data.at(rows[0], dim), hi = lo;
        for (const std::uint32_t id : rows) {
            const double v = data.at(id, dim);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return {lo, hi};
    }

    std::int32_t grow(std::vector<std::uint32_t>& rows, int depth) {
        if (depth >= depth_limit || rows.size() < 2) return make_leaf(rows);

        // Uniform dimension, redrawn when the partition has no spread there.
        // After a few misses, scan from a random offset for any dimension
        // with spread; none at all means the rows are identical.
        const std::size_t dims = data.cols();
        std::size_t dim = dims;
        double lo = 0.0, hi = 0.0;
        for (int attempt = 0; attempt < 16; ++attempt) {
            const std::size_t candidate = uniform_index(rng, dims);
            const auto [a, b] = column_range(rows, candidate);
            if (a < b) {
                dim = candidate;
                lo = a;
                hi = b;
                break;
            }
        }
        if (dim == dims) {
            const std::size_t start = uniform_index(rng, dims);
            for (std::size_t off = 0; off < dims; ++off) {
                const std::size_t candidate = (start + off) % dims;
                const auto [a, b] = column_range(rows, candidate);
                if (a < b) {
                    dim = candidate;
                    lo = a;
                    hi = b;
                    break;
                }
            }
        }
        if (dim == dims) return make_leaf(rows);

        // Keep the cut strictly above the minimum so neither side is empty.
        double split = lo;
        for (int tries = 0; split <= lo; ++tries) {
            if (tries == 100) {
                split = hi; // denormal-narrow range; hi still separates the min
                break;
            }
            split = lo + uniform01(rng) * (hi - lo);
        }

        std::vector<std::uint32_t> left_rows, right_rows;
        for (const std::uint32_t id : rows)
            (data.at(id, dim) < split ? left_rows : right_rows).push_back(id);

        const auto index = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[index].size = static_cast<std::uint32_t>(rows.size());
        rows.clear();
        rows.shrink_to_fit();

        const std::int32_t left = grow(left_rows, depth + 1);
        const std::int32_t right = grow(right_rows, depth + 1);
        tree.nodes[index].dim = static_cast<std::int32_t>(dim);
        tree.nodes[index].split = split;
        tree.nodes[index].left = left;
        tree.nodes[index].right = right;
        return index;
    }

    std::int32_t make_leaf(const std::vector<std::uint32_t>& rows) {
        const auto index = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[index].size = static_cast<std::uint32_t>(rows.size());
        return index;
    }
};

} // namespace

BaselineForest::BaselineForest(const Matrix& data, const BaselineForestParams& params)
    : params_(params), dims_(data.cols()) {
    if (params_.trees == 0) throw std::invalid_argument("baseline forest: need at least one tree");
    if (params_.subsample < 2)
        throw std::invalid_argument("baseline forest: subsample must be >= 2");
    if (data.rows() == 0 || data.cols() == 0)
        throw std::invalid_argument("baseline forest: empty data");

    const std::size_t n = data.rows();
    psi_eff_ = static_cast<std::uint32_t>(std::min<std::size_t>(params_.subsample, n));
    depth_limit_ = depth_limit_for(psi_eff_, 2);

    trees_.resize(params_.trees);
    parallel_for(params_.trees, [&](std::size_t t) {
        Rng rng(derive_seed(params_.seed, t));
        const auto picks = sample_without_replacement(rng, n, psi_eff_);
        std::vector<std::uint32_t> rows(picks.size());
        for (std::size_t i = 0; i < picks.size(); ++i)
            rows[i] = static_cast<std::uint32_t>(picks[i]);
        TreeBuilder builder{data, depth_limit_, rng, {}};
        builder.grow(rows, 0);
        trees_[t] = std::move(builder.tree);
    });
}

double BaselineForest::tree_path_length(std::size_t tree, PointRef q) const {
    const BaselineTree& t = trees_[tree];
    std::int32_t node = 0;
    int depth = 0;
    while (!t.nodes[node].leaf()) {
        const BaselineNode& at = t.nodes[node];
        node = q[static_cast<std::size_t>(at.dim)] < at.split ? at.left : at.right;
        ++depth;
    }
    return depth + adjustment_c(t.nodes[node].size);
}

std::vector<double> BaselineForest::average_depths(const Matrix& queries) const {
    if (queries.cols() != dims_)
        throw LengthMismatch("baseline forest: query dimension differs from training data");
    std::vector<double> out(queries.rows());
    parallel_for(queries.rows(), [&](std::size_t i) {
        const PointRef q = queries.row(i);
        double sum = 0.0;
        for (std::size_t t = 0; t < trees_.size(); ++t) sum += tree_path_length(t, q);
        out[i] = sum / static_cast<double>(trees_.size());
    });
    return out;
}

double BaselineForest::score_norm() const { return adjustment_c(psi_eff_); }

std::vector<double> BaselineForest::anomaly_scores(const Matrix& queries) const {
    std::vector<double> scores = average_depths(queries);
    const double norm = score_norm();
    for (double& s : scores) s = isolation_score(s, norm);
    return scores;
}

std::vector<std::size_t> BaselineForest::leaf_depth_histogram() const {
    std::vector<std::size_t> hist(static_cast<std::size_t>(depth_limit_) + 1, 0);
    std::vector<std::pair<std::int32_t, int>> stack;
    for (const BaselineTree& tree : trees_) {
        stack.push_back({0, 0});
        while (!stack.empty()) {
            const auto [node, depth] = stack.back();
            stack.pop_back();
            const BaselineNode& at = tree.nodes[node];
            if (at.leaf()) {
                hist[depth] += 1;
                continue;
            }
            stack.push_back({at.left, depth + 1});
            stack.push_back({at.right, depth + 1});
        }
    }
    return hist;
}

std::vector<double> baseline_iforest(const Matrix& x, std::uint32_t trees, std::uint32_t psi,
                                     std::uint64_t seed) {
    BaselineForestParams params;
    params.trees = trees;
    params.subsample = psi;
    params.seed = seed;
    return BaselineForest(x, params).anomaly_scores(x);
}

} // namespace isoprefs
