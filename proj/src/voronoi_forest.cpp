#include "isoprefs/voronoi_forest.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "isoprefs/common.hpp"
#include "isoprefs/detail/accum.hpp"
#include "isoprefs/forest_common.hpp"
#include "isoprefs/parallel.hpp"

namespace isoprefs {

namespace {

struct TreeBuilder {
    const Matrix& data;
    std::uint32_t branching;
    int depth_limit;
    Metric metric;
    Rng& rng;
    VoronoiTree tree;

    std::int32_t grow(std::vector<std::uint32_t>& rows, int depth) {
        if (depth >= depth_limit || rows.size() < branching) return make_leaf(rows);

        const auto picks = sample_without_replacement(rng, rows.size(), branching);
        std::vector<std::uint32_t> seeds(branching);
        for (std::uint32_t s = 0; s < branching; ++s) seeds[s] = rows[picks[s]];

        std::vector<std::vector<std::uint32_t>> buckets(branching);
        for (const std::uint32_t id : rows) {
            const PointRef p = data.row(id);
            std::uint32_t best = 0;
            double best_d = metric_distance(metric, p, data.row(seeds[0]));
            for (std::uint32_t s = 1; s < branching; ++s) {
                const double d = metric_distance(metric, p, data.row(seeds[s]));
                if (d < best_d) {
                    best_d = d;
                    best = s;
                }
            }
            buckets[best].push_back(id);
        }

        // A split where one cell swallows everything (duplicated points, or a
        // metric collapse) would recurse without progress; close it off.
        for (const auto& bucket : buckets)
            if (bucket.size() == rows.size()) return make_leaf(rows);

        const auto index = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[index].size = static_cast<std::uint32_t>(rows.size());
        rows.clear();
        rows.shrink_to_fit();

        std::vector<std::int32_t> children(branching);
        for (std::uint32_t s = 0; s < branching; ++s) children[s] = grow(buckets[s], depth + 1);
        tree.nodes[index].seeds = std::move(seeds);
        tree.nodes[index].children = std::move(children);
        return index;
    }

    std::int32_t make_leaf(std::vector<std::uint32_t>& rows) {
        const auto index = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[index].size = static_cast<std::uint32_t>(rows.size());
        return index;
    }
};

} // namespace

VoronoiTree build_voronoi_tree(const Matrix& data, std::vector<std::uint32_t> rows,
                               std::uint32_t branching, int depth_limit, Metric metric,
                               Rng& rng) {
    if (branching < 2) throw std::invalid_argument("voronoi tree: branching must be >= 2");
    TreeBuilder builder{data, branching, depth_limit, metric, rng, {}};
    builder.grow(rows, 0);
    return std::move(builder.tree);
}

double path_length(PointRef q, const VoronoiTree& tree, const Matrix& data, Metric metric) {
    std::int32_t node = 0;
    int depth = 0;
    while (!tree.nodes[node].leaf()) {
        const VoronoiNode& at = tree.nodes[node];
        std::uint32_t best = 0;
        double best_d = metric_distance(metric, q, data.row(at.seeds[0]));
        for (std::uint32_t s = 1; s < at.seeds.size(); ++s) {
            const double d = metric_distance(metric, q, data.row(at.seeds[s]));
            if (d < best_d) {
                best_d = d;
                best = s;
            }
        }
        node = at.children[best];
        ++depth;
    }
    return depth + adjustment_c(tree.nodes[node].size);
}

VoronoiForest::VoronoiForest(std::shared_ptr<const Matrix> data,
                             const VoronoiForestParams& params)
    : params_(params), data_(std::move(data)) {
    if (!data_) throw std::invalid_argument("voronoi forest: null data");
    if (params_.trees == 0) throw std::invalid_argument("voronoi forest: need at least one tree");
    if (params_.branching < 2)
        throw std::invalid_argument("voronoi forest: branching must be >= 2");
    if (params_.subsample < params_.branching)
        throw std::invalid_argument("voronoi forest: subsample must be >= branching");

    const std::size_t n = data_->rows();
    psi_eff_ = static_cast<std::uint32_t>(std::min<std::size_t>(params_.subsample, n));
    depth_limit_ = depth_limit_for(psi_eff_, params_.branching);

    if (params_.metric == Metric::tanimoto) {
        row_norm2_.resize(n);
        for (std::size_t r = 0; r < n; ++r)
            row_norm2_[r] = detail::lane_norm2(data_->row(r).data(), data_->cols());
    }

    trees_.resize(params_.trees);
    parallel_for(params_.trees, [&](std::size_t t) {
        Rng rng(derive_seed(params_.seed, t));
        const auto picks = sample_without_replacement(rng, n, psi_eff_);
        std::vector<std::uint32_t> rows(picks.size());
        for (std::size_t i = 0; i < picks.size(); ++i)
            rows[i] = static_cast<std::uint32_t>(picks[i]);
        trees_[t] = build_voronoi_tree(*data_, std::move(rows), params_.branching, depth_limit_,
                                       params_.metric, rng);
    });
}

double VoronoiForest::seed_distance(PointRef q, double qnorm2, std::uint32_t row) const {
    if (params_.metric != Metric::tanimoto) return metric_distance(params_.metric, q, data_->row(row));
    instrument::count_distance_call();
    const double dot = detail::lane_dot(q.data(), data_->row(row).data(), q.size());
    const double denom = (qnorm2 + row_norm2_[row]) - dot;
    if (denom <= 0.0) return 0.0;
    return 1.0 - dot / denom;
}

double VoronoiForest::tree_path_length(std::size_t tree, PointRef q) const {
    const double qnorm2 =
        params_.metric == Metric::tanimoto ? detail::lane_norm2(q.data(), q.size()) : 0.0;
    const VoronoiTree& t = trees_[tree];
    std::int32_t node = 0;
    int depth = 0;
    while (!t.nodes[node].leaf()) {
        const VoronoiNode& at = t.nodes[node];
        std::uint32_t best = 0;
        double best_d = seed_distance(q, qnorm2, at.seeds[0]);
        for (std::uint32_t s = 1; s < at.seeds.size(); ++s) {
            const double d = seed_distance(q, qnorm2, at.seeds[s]);
            if (d < best_d) {
                best_d = d;
                best = s;
            }
        }
        node = at.children[best];
        ++depth;
    }
    return depth + adjustment_c(t.nodes[node].size);
}

std::vector<double> VoronoiForest::average_depths(const Matrix& queries) const {
    if (queries.cols() != data_->cols())
        throw LengthMismatch("voronoi forest: query dimension differs from training data");
    std::vector<double> out(queries.rows());
    parallel_for(queries.rows(), [&](std::size_t i) {
        const PointRef q = queries.row(i);
        double sum = 0.0;
        for (std::size_t t = 0; t < trees_.size(); ++t) sum += tree_path_length(t, q);
        out[i] = sum / static_cast<double>(trees_.size());
    });
    return out;
}

double VoronoiForest::score_norm() const {
    if (params_.logb_norm)
        return std::log(static_cast<double>(psi_eff_)) / std::log(static_cast<double>(params_.branching));
    return adjustment_c(psi_eff_);
}

std::vector<double> VoronoiForest::anomaly_scores(const Matrix& queries) const {
    std::vector<double> scores = average_depths(queries);
    const double norm = score_norm();
    for (double& s : scores) s = isolation_score(s, norm);
    return scores;
}

std::vector<std::size_t> VoronoiForest::leaf_depth_histogram() const {
    std::vector<std::size_t> hist(static_cast<std::size_t>(depth_limit_) + 1, 0);
    std::vector<std::pair<std::int32_t, int>> stack;
    for (const VoronoiTree& tree : trees_) {
        stack.push_back({0, 0});
        while (!stack.empty()) {
            const auto [node, depth] = stack.back();
            stack.pop_back();
            const VoronoiNode& at = tree.nodes[node];
            if (at.leaf()) {
                hist[depth] += 1;
                continue;
            }
            for (const std::int32_t child : at.children) stack.push_back({child, depth + 1});
        }
    }
    return hist;
}

} // namespace isoprefs
