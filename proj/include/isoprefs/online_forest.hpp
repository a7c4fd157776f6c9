#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "isoprefs/matrix.hpp"
#include "isoprefs/rng.hpp"

// Streaming isolation forest over a FIFO window. Each tree is an adaptive
// histogram: a bin splits once enough points have crossed it, and collapses
// back when forgetting drains it. No data points are stored in the trees,
// only per-bin heights and supports, so memory is independent of the stream
// length.

namespace isoprefs {

struct Box {
    std::vector<double> lo, hi;

    static Box at(PointRef x);
    void expand(PointRef x);
    bool contains(PointRef x) const;
    static Box enclose(const Box& a, const Box& b);
};

struct OnlineNode {
    // Signed on purpose: forgetting routes by the current splits, so a point
    // learned before a split can drain a child it never incremented. The
    // parent heights stay exact; only the root is guarded against underflow.
    std::int64_t h = 0;
    std::optional<Box> support; // absent until the first point crosses
    int split_dim = -1;         // -1 marks a leaf
    double split_at = 0.0;
    int depth = 0;
    std::unique_ptr<OnlineNode> left, right;

    bool leaf() const { return split_dim < 0; }
};

struct OnlineForestParams {
    std::uint32_t trees = 32;            // tau
    std::uint32_t window = 2048;         // omega, FIFO length
    std::uint32_t max_leaf_samples = 32; // eta, split threshold at depth 0
    std::uint64_t seed = 0;
};

// Average and worst case tree depth for a window/leaf-size pair:
// (floor(log2(omega/eta)/2 + 1), floor(log2((omega+1)/eta) + 1)).
std::pair<int, int> depth_bounds(std::uint32_t omega, std::uint32_t eta);

class OnlineForest {
public:
    OnlineForest(std::size_t dims, const OnlineForestParams& params);

    // Stream driver: buffer x, learn it into every tree, forget the oldest
    // point once the buffer exceeds the window, then score x.
    double process(PointRef x);
    std::vector<double> process_all(const Matrix& rows);

    // The per-tree operations underneath process. Calling them directly is
    // for tests and custom drivers; mixing them with process on the same
    // instance desynchronizes the internal buffer.
    void learn(PointRef x);
    void forget(PointRef x);

    // Depth of x's bin in one tree: leaf depth plus log2(h/eta) for an
    // overfull leaf, clamped at zero otherwise.
    double point_depth(PointRef x, std::size_t tree) const;
    // 2^(-mean depth / log2(omega/eta)); 0.5 when omega = eta. Read only.
    double score(PointRef x) const;

    std::size_t dims() const { return dims_; }
    const OnlineForestParams& params() const { return params_; }
    int depth_cap() const { return depth_cap_; }
    double score_norm() const { return score_norm_; }
    std::size_t buffer_size() const { return buffer_.size(); }
    std::uint64_t learned() const { return learned_; }
    const OnlineNode& root(std::size_t tree) const { return trees_[tree].root; }

    // Walks every tree checking the structural invariants: split and children
    // come together, mass conservation h = h_l + h_r, child depths, depth
    // cap, box sanity, support equal to the union of the child supports, and
    // root height equal to learned minus forgotten. Throws on any breach.
    void validate() const;

private:
    struct Tree {
        OnlineNode root;
        Rng rng;
    };

    void learn_node(OnlineNode& node, PointRef x, Rng& rng);
    void split_leaf(OnlineNode& node, Rng& rng);
    void forget_node(OnlineNode& node, PointRef x);
    std::int64_t split_threshold(int depth) const;

    std::size_t dims_ = 0;
    OnlineForestParams params_;
    int depth_cap_ = 0;
    double score_norm_ = 0.0;
    std::uint64_t learned_ = 0;
    std::uint64_t forgotten_ = 0;
    std::vector<Tree> trees_;
    std::deque<std::vector<double>> buffer_;
};

} // namespace isoprefs
