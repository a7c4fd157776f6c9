#include "isoprefs/ruzhash.hpp"

#include <limits>
#include <stdexcept>
#include <utility>

#include "isoprefs/common.hpp"
#include "isoprefs/forest_common.hpp"
#include "isoprefs/parallel.hpp"

namespace isoprefs {

RuzHashParams sample_ruzhash_params(Rng& rng, std::size_t dims) {
    RuzHashParams params;
    params.tau.resize(dims);
    for (double& t : params.tau) t = uniform01(rng);
    const auto perm = random_permutation(rng, dims);
    params.pi.resize(dims);
    for (std::size_t i = 0; i < dims; ++i) params.pi[i] = static_cast<std::uint32_t>(perm[i]) + 1;
    return params;
}

RuzHashParams sample_ruzhash_params(Rng& rng, std::size_t dims, std::uint32_t buckets) {
    if (buckets == 0 || buckets > 65535)
        throw std::invalid_argument("ruzhash params: buckets must be in [1, 65535]");
    RuzHashParams params = sample_ruzhash_params(rng, dims);
    params.beta.resize(dims);
    for (std::uint16_t& b : params.beta)
        b = static_cast<std::uint16_t>(uniform_index(rng, buckets) + 1);
    return params;
}

std::optional<std::uint32_t> ruzhash(PointRef p, const RuzHashParams& params) {
    if (p.size() != params.tau.size())
        throw LengthMismatch("ruzhash: vector length differs from parameter length");
    std::uint32_t best = std::numeric_limits<std::uint32_t>::max();
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > params.tau[i] && params.pi[i] < best) best = params.pi[i];
    if (best == std::numeric_limits<std::uint32_t>::max()) return std::nullopt;
    return best;
}

std::optional<std::uint32_t> ruzhash_aggregated(PointRef p, const RuzHashParams& params) {
    if (params.beta.empty())
        throw std::invalid_argument("ruzhash_aggregated: params carry no bucket map");
    const auto h = ruzhash(p, params);
    if (!h) return std::nullopt;
    return static_cast<std::uint32_t>(params.beta[*h - 1]);
}

std::uint32_t rz_bucket(PointRef p, const RuzHashParams& params) {
    const auto h = ruzhash_aggregated(p, params);
    return h ? *h - 1 : 0;
}

double estimate_collision(PointRef p, PointRef q, std::optional<std::uint32_t> buckets,
                          std::uint32_t trials, std::uint64_t seed) {
    if (p.size() != q.size())
        throw LengthMismatch("estimate_collision: vector lengths differ");
    if (trials == 0) throw std::invalid_argument("estimate_collision: trials must be >= 1");
    Rng rng(seed);
    std::uint32_t hits = 0;
    for (std::uint32_t k = 0; k < trials; ++k) {
        if (buckets) {
            const auto params = sample_ruzhash_params(rng, p.size(), *buckets);
            hits += rz_bucket(p, params) == rz_bucket(q, params);
        } else {
            const auto params = sample_ruzhash_params(rng, p.size());
            hits += ruzhash(p, params) == ruzhash(q, params);
        }
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
}

namespace {

struct TreeBuilder {
    const Matrix& data;
    std::uint32_t branching;
    int depth_limit;
    Rng& rng;
    RzTree tree;

    std::int32_t grow(std::vector<std::uint32_t>& rows, int depth) {
        const auto index = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[index].size = static_cast<std::uint32_t>(rows.size());
        if (depth >= depth_limit || rows.size() < branching) return index;

        RuzHashParams params = sample_ruzhash_params(rng, data.cols(), branching);
        std::vector<std::vector<std::uint32_t>> buckets(branching);
        for (const std::uint32_t id : rows) buckets[rz_bucket(data.row(id), params)].push_back(id);
        rows.clear();
        rows.shrink_to_fit();

        std::vector<std::int32_t> children(branching);
        for (std::uint32_t b = 0; b < branching; ++b) children[b] = grow(buckets[b], depth + 1);
        tree.nodes[index].params = std::move(params);
        tree.nodes[index].children = std::move(children);
        return index;
    }
};

} // namespace

RzTree build_rzhash_tree(const Matrix& data, std::vector<std::uint32_t> rows,
                         std::uint32_t branching, int depth_limit, Rng& rng) {
    if (branching < 2) throw std::invalid_argument("rzhash tree: branching must be >= 2");
    TreeBuilder builder{data, branching, depth_limit, rng, {}};
    builder.grow(rows, 0);
    return std::move(builder.tree);
}

double path_length(PointRef p, const RzTree& tree) {
    std::int32_t node = 0;
    int depth = 0;
    while (!tree.nodes[node].leaf()) {
        node = tree.nodes[node].children[rz_bucket(p, tree.nodes[node].params)];
        ++depth;
    }
    return depth + adjustment_c(tree.nodes[node].size);
}

RzHashForest::RzHashForest(const Matrix& data, const RzHashForestParams& params)
    : params_(params), dims_(data.cols()) {
    if (params_.trees == 0) throw std::invalid_argument("rzhash forest: need at least one tree");
    if (params_.branching < 2 || params_.branching > 256)
        throw std::invalid_argument("rzhash forest: branching must be in [2, 256]");
    if (params_.subsample < params_.branching)
        throw std::invalid_argument("rzhash forest: subsample must be >= branching");

    const std::size_t n = data.rows();
    psi_eff_ = static_cast<std::uint32_t>(std::min<std::size_t>(params_.subsample, n));
    depth_limit_ = depth_limit_for(psi_eff_, params_.branching);

    trees_.resize(params_.trees);
    parallel_for(params_.trees, [&](std::size_t t) {
        Rng rng(derive_seed(params_.seed, t));
        const auto picks = sample_without_replacement(rng, n, psi_eff_);
        std::vector<std::uint32_t> rows(picks.size());
        for (std::size_t i = 0; i < picks.size(); ++i)
            rows[i] = static_cast<std::uint32_t>(picks[i]);
        trees_[t] = build_rzhash_tree(data, std::move(rows), params_.branching, depth_limit_, rng);
    });
}

double RzHashForest::score_norm() const {
    if (params_.logb_norm)
        return std::log(static_cast<double>(psi_eff_)) / std::log(static_cast<double>(params_.branching));
    return adjustment_c(psi_eff_);
}

std::vector<double> RzHashForest::average_depths(const Matrix& queries) const {
    if (queries.cols() != dims_)
        throw LengthMismatch("rzhash forest: query dimension differs from training data");
    std::vector<double> out(queries.rows());
    parallel_for(queries.rows(), [&](std::size_t i) {
        const PointRef q = queries.row(i);
        double sum = 0.0;
        for (const RzTree& tree : trees_) sum += path_length(q, tree);
        out[i] = sum / static_cast<double>(trees_.size());
    });
    return out;
}

std::vector<double> RzHashForest::anomaly_scores(const Matrix& queries) const {
    std::vector<double> scores = average_depths(queries);
    const double norm = score_norm();
    for (double& s : scores) s = isolation_score(s, norm);
    return scores;
}

std::vector<std::size_t> RzHashForest::leaf_depth_histogram() const {
    std::vector<std::size_t> hist(static_cast<std::size_t>(depth_limit_) + 1, 0);
    std::vector<std::pair<std::int32_t, int>> stack;
    for (const RzTree& tree : trees_) {
        stack.push_back({0, 0});
        while (!stack.empty()) {
            const auto [node, depth] = stack.back();
            stack.pop_back();
            const RzNode& at = tree.nodes[node];
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
