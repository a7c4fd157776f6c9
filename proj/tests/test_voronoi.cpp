#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "isoprefs/forest_common.hpp"
#include "isoprefs/geometry.hpp"
#include "isoprefs/preference.hpp"
#include "isoprefs/rng.hpp"
#include "isoprefs/voronoi_forest.hpp"

using namespace isoprefs;

namespace {

Matrix random_prefs(std::size_t n, std::size_t m, std::uint64_t seed) {
    Rng rng(seed);
    Matrix x(n, m);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < m; ++c) x.at(r, c) = uniform01(rng);
    return x;
}

// Walks every node of a tree, checking the structural invariants: child sizes
// sum to the parent size, leaves sit within the depth limit, and leaf sizes
// add up to the build population.
void check_tree_shape(const VoronoiTree& tree, std::size_t expect_points, int depth_limit) {
    std::size_t leaf_total = 0;
    std::vector<std::pair<std::int32_t, int>> stack{{0, 0}};
    while (!stack.empty()) {
        const auto [id, depth] = stack.back();
        stack.pop_back();
        const VoronoiNode& node = tree.nodes[id];
        if (node.leaf()) {
            CHECK(depth <= depth_limit);
            leaf_total += node.size;
            continue;
        }
        CHECK(node.seeds.size() == node.children.size());
        std::size_t child_sum = 0;
        for (const std::int32_t child : node.children) {
            child_sum += tree.nodes[child].size;
            stack.push_back({child, depth + 1});
        }
        CHECK(child_sum == node.size);
    }
    CHECK(leaf_total == expect_points);
    CHECK(tree.nodes[0].size == expect_points);
}

} // namespace

TEST_SUITE("voronoi") {

TEST_CASE("path length adjustment") {
    CHECK(adjustment_c(0) == 0.0);
    CHECK(adjustment_c(1) == 0.0);
    CHECK(adjustment_c(2) == 1.0);
    CHECK(std::abs(adjustment_c(256) - 10.2447709) < 1e-6);

    // The closed form approximates the exact harmonic-number expression with
    // error on the order of 1/n.
    for (std::size_t n : {256u, 1024u, 4096u}) {
        double harmonic = 0.0;
        for (std::size_t i = 1; i < n; ++i) harmonic += 1.0 / static_cast<double>(i);
        const double exact = 2.0 * harmonic - 2.0 * static_cast<double>(n - 1) / static_cast<double>(n);
        CHECK(std::abs(adjustment_c(n) - exact) < 1e-2);
    }

    // Strictly increasing in the sample size.
    for (std::size_t n = 2; n < 100; ++n) CHECK(adjustment_c(n + 1) > adjustment_c(n));
}

TEST_CASE("depth limit") {
    CHECK(depth_limit_for(256, 2) == 8);
    CHECK(depth_limit_for(256, 16) == 2);
    CHECK(depth_limit_for(257, 2) == 9);
    CHECK(depth_limit_for(100, 3) == 5);
    CHECK(depth_limit_for(2, 2) == 1);
    CHECK(depth_limit_for(1, 2) == 0);
}

TEST_CASE("isolation score") {
    const double c = adjustment_c(256);
    CHECK(isolation_score(c, c) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(isolation_score(0.0, c) == 1.0);
    CHECK(isolation_score(1.0, c) > isolation_score(2.0, c));
    CHECK(isolation_score(5.0, 0.0) == 0.5); // degenerate normalizer
}

TEST_CASE("two point tree isolates both seeds") {
    auto data = std::make_shared<Matrix>(2, 2);
    data->at(0, 0) = 1.0;
    data->at(1, 1) = 1.0;
    VoronoiForestParams params;
    params.trees = 1;
    params.subsample = 2;
    params.branching = 2;
    params.metric = Metric::tanimoto;
    VoronoiForest forest(data, params);
    CHECK(forest.psi_eff() == 2);
    CHECK(forest.depth_limit() == 1);
    // Each seed routes to its own cell, landing in a singleton leaf.
    CHECK(forest.tree_path_length(0, data->row(0)) == 1.0);
    CHECK(forest.tree_path_length(0, data->row(1)) == 1.0);
}

TEST_CASE("distance ties resolve to the lowest seed") {
    // Two duplicated rows plus a distinct one; a query at distance 1 from
    // every seed must follow the first seed's child.
    Matrix data(3, 3);
    data.at(0, 0) = 1.0;
    data.at(1, 0) = 1.0;
    data.at(2, 1) = 1.0;
    const std::vector<double> qv = {0.0, 0.0, 1.0};
    const PointRef q(qv);

    bool found_internal_root = false;
    for (std::uint64_t seed = 0; seed < 16 && !found_internal_root; ++seed) {
        Rng rng(seed);
        VoronoiTree tree =
            build_voronoi_tree(data, {0, 1, 2}, 2, 2, Metric::tanimoto, rng);
        const VoronoiNode& root = tree.nodes[0];
        if (root.leaf()) continue; // both seeds were the duplicated row
        found_internal_root = true;
        const VoronoiNode& first_child = tree.nodes[root.children[0]];
        REQUIRE(first_child.leaf());
        CHECK(path_length(q, tree, data, Metric::tanimoto) ==
              1.0 + adjustment_c(first_child.size));
    }
    CHECK(found_internal_root);
}

TEST_CASE("identical points collapse to a root leaf") {
    Matrix data(12, 4);
    for (std::size_t r = 0; r < 12; ++r) data.at(r, 2) = 0.75;
    Rng rng(7);
    std::vector<std::uint32_t> rows(12);
    std::iota(rows.begin(), rows.end(), 0u);
    VoronoiTree tree = build_voronoi_tree(data, std::move(rows), 2, 4, Metric::tanimoto, rng);
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].leaf());
    CHECK(tree.nodes[0].size == 12);
    CHECK(path_length(data.row(0), tree, data, Metric::tanimoto) == adjustment_c(12));
}

TEST_CASE("duplicated dataset scores exactly one half") {
    auto data = std::make_shared<Matrix>(20, 3);
    for (std::size_t r = 0; r < 20; ++r) data->at(r, 1) = 0.5;
    VoronoiForestParams params;
    params.trees = 10;
    params.subsample = 20;
    params.branching = 2;
    const VoronoiForest forest(data, params);
    // Every tree degenerates to a root leaf of size psi, so E[depth] = c(psi)
    // and the score is 2^-1 up to the rounding in the 10-tree average.
    const auto scores = forest.anomaly_scores(*data);
    for (const double s : scores) {
        CHECK(s == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(s == scores[0]);
    }
}

TEST_CASE("forest structure invariants") {
    auto data = std::make_shared<Matrix>(random_prefs(60, 5, 11));
    VoronoiForestParams params;
    params.trees = 10;
    params.subsample = 40;
    params.branching = 3;
    params.seed = 5;
    const VoronoiForest forest(data, params);
    CHECK(forest.psi_eff() == 40);
    CHECK(forest.depth_limit() == 4);
    for (const VoronoiTree& tree : forest.trees()) check_tree_shape(tree, 40, 4);

    const auto hist = forest.leaf_depth_histogram();
    CHECK(hist.size() == 5);
    std::size_t leaves = 0;
    for (const std::size_t h : hist) leaves += h;
    CHECK(leaves > 0);

    const auto scores = forest.anomaly_scores(*data);
    for (const double s : scores) {
        CHECK(s > 0.0);
        CHECK(s < 1.0);
    }
}

TEST_CASE("same seed rebuild is identical") {
    auto data = std::make_shared<Matrix>(random_prefs(50, 6, 3));
    VoronoiForestParams params;
    params.trees = 8;
    params.subsample = 32;
    params.branching = 2;
    params.seed = 99;
    const VoronoiForest a(data, params);
    const VoronoiForest b(data, params);
    REQUIRE(a.trees().size() == b.trees().size());
    for (std::size_t t = 0; t < a.trees().size(); ++t) {
        const auto& ta = a.trees()[t].nodes;
        const auto& tb = b.trees()[t].nodes;
        REQUIRE(ta.size() == tb.size());
        for (std::size_t i = 0; i < ta.size(); ++i) {
            CHECK(ta[i].seeds == tb[i].seeds);
            CHECK(ta[i].children == tb[i].children);
            CHECK(ta[i].size == tb[i].size);
        }
    }
    const auto da = a.average_depths(*data);
    const auto db = b.average_depths(*data);
    CHECK(da == db);

    params.seed = 100;
    const VoronoiForest c(data, params);
    bool differs = false;
    for (std::size_t t = 0; t < a.trees().size() && !differs; ++t)
        differs = a.trees()[t].nodes.size() != c.trees()[t].nodes.size() ||
                  a.trees()[t].nodes[0].seeds != c.trees()[t].nodes[0].seeds;
    CHECK(differs);
}

TEST_CASE("log-b normalization option") {
    auto data = std::make_shared<Matrix>(random_prefs(64, 4, 21));
    VoronoiForestParams params;
    params.trees = 4;
    params.subsample = 64;
    params.branching = 4;
    VoronoiForest plain(data, params);
    CHECK(plain.score_norm() == doctest::Approx(adjustment_c(64)));
    params.logb_norm = true;
    VoronoiForest logb(data, params);
    CHECK(logb.score_norm() == doctest::Approx(3.0)); // log_4(64)
}

TEST_CASE("euclidean forest flags an outlier blob point") {
    Rng rng(17);
    auto data = std::make_shared<Matrix>(41, 2);
    for (std::size_t r = 0; r < 40; ++r) {
        data->at(r, 0) = gaussian(rng);
        data->at(r, 1) = gaussian(rng);
    }
    data->at(40, 0) = 25.0;
    data->at(40, 1) = -30.0;
    VoronoiForestParams params;
    params.trees = 30;
    params.subsample = 41;
    params.branching = 2;
    params.metric = Metric::euclidean;
    const VoronoiForest forest(data, params);
    const auto scores = forest.anomaly_scores(*data);
    const double outlier = scores[40];
    for (std::size_t r = 0; r < 40; ++r) CHECK(outlier > scores[r]);
}

TEST_CASE("preference pipeline separates structured points from outliers") {
    // Two horizontal lines plus scattered outliers; the embedding gives the
    // line points strong shared preferences while outliers stay near zero.
    Rng rng(23);
    const std::size_t per_line = 50, outliers = 20;
    Matrix pts(2 * per_line + outliers, 2);
    for (std::size_t i = 0; i < per_line; ++i) {
        pts.at(i, 0) = uniform01(rng);
        pts.at(i, 1) = 0.0 + 0.01 * gaussian(rng);
        pts.at(per_line + i, 0) = uniform01(rng);
        pts.at(per_line + i, 1) = 1.0 + 0.01 * gaussian(rng);
    }
    for (std::size_t i = 0; i < outliers; ++i) {
        const std::size_t r = 2 * per_line + i;
        pts.at(r, 0) = uniform01(rng) * 4.0 - 2.0;
        pts.at(r, 1) = uniform01(rng) * 4.0 - 2.0;
    }

    const auto models = sample_models(pts, ModelFamily{FamilyKind::line2d}, 600, 31);
    PreferenceConfig config;
    config.sigma = 0.02;
    auto prefs = std::make_shared<Matrix>(embed(pts, models, config));

    VoronoiForestParams params;
    params.trees = 50;
    params.subsample = 120;
    params.branching = 2;
    params.seed = 77;
    const VoronoiForest forest(prefs, params);
    const auto scores = forest.anomaly_scores(*prefs);

    double genuine = 0.0, outlier = 0.0;
    for (std::size_t i = 0; i < 2 * per_line; ++i) genuine += scores[i];
    for (std::size_t i = 2 * per_line; i < pts.rows(); ++i) outlier += scores[i];
    genuine /= 2 * per_line;
    outlier /= outliers;
    CHECK(outlier > genuine + 0.05);
}

TEST_CASE("parameter validation") {
    auto data = std::make_shared<Matrix>(random_prefs(10, 3, 1));
    VoronoiForestParams params;
    params.branching = 1;
    CHECK_THROWS_AS(VoronoiForest(data, params), std::invalid_argument);
    params.branching = 8;
    params.subsample = 4;
    CHECK_THROWS_AS(VoronoiForest(data, params), std::invalid_argument);
    params.subsample = 8;
    params.trees = 0;
    CHECK_THROWS_AS(VoronoiForest(data, params), std::invalid_argument);
}

} // TEST_SUITE
