#include "isoprefs/online_forest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "isoprefs/common.hpp"

namespace isoprefs {

Box Box::at(PointRef x) {
    Box box;
    box.lo.assign(x.begin(), x.end());
    box.hi = box.lo;
    return box;
}

void Box::expand(PointRef x) {
    for (std::size_t i = 0; i < lo.size(); ++i) {
        lo[i] = std::min(lo[i], x[i]);
        hi[i] = std::max(hi[i], x[i]);
    }
}

bool Box::contains(PointRef x) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
}

Box Box::enclose(const Box& a, const Box& b) {
    Box box = a;
    for (std::size_t i = 0; i < box.lo.size(); ++i) {
        box.lo[i] = std::min(box.lo[i], b.lo[i]);
        box.hi[i] = std::max(box.hi[i], b.hi[i]);
    }
    return box;
}

std::pair<int, int> depth_bounds(std::uint32_t omega, std::uint32_t eta) {
    if (eta == 0 || omega < eta)
        throw std::invalid_argument("depth bounds need omega >= eta >= 1");
    const double ratio = std::log2(static_cast<double>(omega) / eta);
    const int avg = static_cast<int>(std::floor(0.5 * ratio + 1.0));
    const int worst =
        static_cast<int>(std::floor(std::log2((static_cast<double>(omega) + 1.0) / eta) + 1.0));
    return {avg, worst};
}

OnlineForest::OnlineForest(std::size_t dims, const OnlineForestParams& params)
    : dims_(dims), params_(params) {
    if (dims == 0) throw std::invalid_argument("dimension must be positive");
    if (params.trees == 0) throw std::invalid_argument("tree count must be positive");
    if (params.max_leaf_samples == 0)
        throw std::invalid_argument("max leaf samples must be positive");
    if (params.window < params.max_leaf_samples)
        throw std::invalid_argument("window must be at least max leaf samples");

    // Largest depth whose split threshold eta*2^k still fits in the window.
    while (static_cast<std::uint64_t>(params.max_leaf_samples)
               << (static_cast<unsigned>(depth_cap_) + 1) <=
           params.window)
        ++depth_cap_;
    score_norm_ = std::log2(static_cast<double>(params.window) / params.max_leaf_samples);

    trees_.resize(params.trees);
    for (std::uint32_t t = 0; t < params.trees; ++t)
        trees_[t].rng.seed(derive_seed(params.seed, t));
}

std::int64_t OnlineForest::split_threshold(int depth) const {
    return static_cast<std::int64_t>(params_.max_leaf_samples) << static_cast<unsigned>(depth);
}

void OnlineForest::learn_node(OnlineNode& node, PointRef x, Rng& rng) {
    node.h += 1;
    if (node.support)
        node.support->expand(x);
    else
        node.support = Box::at(x);
    if (node.leaf()) {
        if (node.h >= split_threshold(node.depth) && node.depth < depth_cap_)
            split_leaf(node, rng);
        return;
    }
    learn_node(x[static_cast<std::size_t>(node.split_dim)] < node.split_at ? *node.left
                                                                           : *node.right,
               x, rng);
}

void OnlineForest::split_leaf(OnlineNode& node, Rng& rng) {
    const std::size_t q = uniform_index(rng, dims_);
    const double lo = node.support->lo[q];
    const double hi = node.support->hi[q];
    const double p = uniform_real(rng, lo, hi);

    // The node's height is redistributed by sampling that many points
    // uniformly from the support; only the split coordinate matters for
    // which side a sample lands on, so only it is drawn.
    std::int64_t left_h = 0;
    for (std::int64_t i = 0; i < node.h; ++i)
        if (uniform_real(rng, lo, hi) < p) ++left_h;

    node.split_dim = static_cast<int>(q);
    node.split_at = p;
    node.left = std::make_unique<OnlineNode>();
    node.right = std::make_unique<OnlineNode>();
    node.left->depth = node.depth + 1;
    node.right->depth = node.depth + 1;
    node.left->h = left_h;
    node.right->h = node.h - left_h;

    // Children start from slices of the parent support. Every point that
    // crossed this node lies in its support, so whichever side the split
    // routes it to contains it; a box around the synthetic samples alone
    // would not give that guarantee.
    Box left_box = *node.support;
    left_box.hi[q] = p;
    Box right_box = *node.support;
    right_box.lo[q] = p;
    node.left->support = std::move(left_box);
    node.right->support = std::move(right_box);
}

void OnlineForest::forget_node(OnlineNode& node, PointRef x) {
    node.h -= 1;
    if (node.leaf()) return;
    if (node.h < split_threshold(node.depth)) {
        node.support = Box::enclose(*node.left->support, *node.right->support);
        node.split_dim = -1;
        node.split_at = 0.0;
        node.left.reset();
        node.right.reset();
        return;
    }
    forget_node(x[static_cast<std::size_t>(node.split_dim)] < node.split_at ? *node.left
                                                                            : *node.right,
                x);
}

void OnlineForest::learn(PointRef x) {
    if (x.size() != dims_) throw LengthMismatch("point dimension mismatch");
    for (Tree& tree : trees_) learn_node(tree.root, x, tree.rng);
    ++learned_;
}

void OnlineForest::forget(PointRef x) {
    if (x.size() != dims_) throw LengthMismatch("point dimension mismatch");
    if (learned_ == forgotten_)
        throw UnderflowViolation("forgetting from an empty forest");
    for (Tree& tree : trees_) forget_node(tree.root, x);
    ++forgotten_;
}

double OnlineForest::point_depth(PointRef x, std::size_t tree) const {
    const OnlineNode* node = &trees_[tree].root;
    while (!node->leaf())
        node = x[static_cast<std::size_t>(node->split_dim)] < node->split_at
                   ? node->left.get()
                   : node->right.get();
    double adjust = 0.0;
    if (node->h > static_cast<std::int64_t>(params_.max_leaf_samples))
        adjust = std::log2(static_cast<double>(node->h) / params_.max_leaf_samples);
    return node->depth + adjust;
}

double OnlineForest::score(PointRef x) const {
    if (x.size() != dims_) throw LengthMismatch("point dimension mismatch");
    if (score_norm_ <= 0.0) return 0.5; // omega = eta: every depth is zero
    double total = 0.0;
    for (std::size_t t = 0; t < trees_.size(); ++t) total += point_depth(x, t);
    return std::exp2(-(total / static_cast<double>(trees_.size())) / score_norm_);
}

double OnlineForest::process(PointRef x) {
    buffer_.emplace_back(x.begin(), x.end());
    learn(x);
    if (buffer_.size() > params_.window) {
        const std::vector<double> oldest = std::move(buffer_.front());
        buffer_.pop_front();
        forget(oldest);
    }
    return score(x);
}

std::vector<double> OnlineForest::process_all(const Matrix& rows) {
    std::vector<double> scores(rows.rows());
    for (std::size_t r = 0; r < rows.rows(); ++r) scores[r] = process(rows.row(r));
    return scores;
}

namespace {

void check(bool ok, const std::string& what) {
    if (!ok) throw std::logic_error("online forest invariant broken: " + what);
}

void validate_node(const OnlineNode& node, int depth_cap, std::size_t dims,
                   std::uint32_t eta) {
    check(node.depth <= depth_cap, "node deeper than the cap");
    if (node.support) {
        check(node.support->lo.size() == dims && node.support->hi.size() == dims,
              "support dimension mismatch");
        for (std::size_t i = 0; i < dims; ++i)
            check(node.support->lo[i] <= node.support->hi[i], "inverted support");
    }
    if (node.leaf()) {
        check(!node.left && !node.right, "leaf with children");
        return;
    }
    check(node.left && node.right, "split without children");
    check(node.support.has_value(), "split without support");
    check(node.split_dim >= 0 && static_cast<std::size_t>(node.split_dim) < dims,
          "split dimension out of range");
    check(node.h == node.left->h + node.right->h, "mass not conserved");
    check(node.left->depth == node.depth + 1 && node.right->depth == node.depth + 1,
          "child depth mismatch");
    check(node.left->support.has_value() && node.right->support.has_value(),
          "child without support");
    const Box merged = Box::enclose(*node.left->support, *node.right->support);
    for (std::size_t i = 0; i < dims; ++i)
        check(merged.lo[i] == node.support->lo[i] && merged.hi[i] == node.support->hi[i],
              "support is not the union of the children");
    const double lo = node.support->lo[static_cast<std::size_t>(node.split_dim)];
    const double hi = node.support->hi[static_cast<std::size_t>(node.split_dim)];
    check(node.split_at >= lo && node.split_at <= hi, "split outside the support");
    validate_node(*node.left, depth_cap, dims, eta);
    validate_node(*node.right, depth_cap, dims, eta);
}

} // namespace

void OnlineForest::validate() const {
    const std::int64_t expected_root =
        static_cast<std::int64_t>(learned_) - static_cast<std::int64_t>(forgotten_);
    for (const Tree& tree : trees_) {
        check(tree.root.h == expected_root, "root height != learned - forgotten");
        validate_node(tree.root, depth_cap_, dims_, params_.max_leaf_samples);
    }
}

} // namespace isoprefs
