#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "isoprefs/common.hpp"
#include "isoprefs/geometry.hpp"
#include "isoprefs/rng.hpp"

using namespace isoprefs;

namespace {

ModelInstance fit(FamilyKind kind, std::vector<std::vector<double>> pts) {
    std::vector<PointRef> refs;
    for (auto& p : pts) refs.emplace_back(p);
    return fit_minimal(ModelFamily{kind}, refs);
}

Matrix to_matrix(const std::vector<std::vector<double>>& pts) {
    Matrix m(pts.size(), pts[0].size());
    for (std::size_t r = 0; r < pts.size(); ++r)
        for (std::size_t c = 0; c < pts[r].size(); ++c) m.at(r, c) = pts[r][c];
    return m;
}

} // namespace

TEST_SUITE("geometry") {

TEST_CASE("line through (0,0),(1,1): residual of (1,0) is sqrt(2)/2") {
    auto m = fit(FamilyKind::line2d, {{0, 0}, {1, 1}});
    double ref[] = {1.0, 0.0};
    CHECK(residual(m, ref) == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
    double on[] = {0.5, 0.5};
    CHECK(residual(m, on) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::hypot(m.theta[0], m.theta[1]) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("circumcircle of (1,0),(0,1),(-1,0) is the unit circle") {
    auto m = fit(FamilyKind::circle2d, {{1, 0}, {0, 1}, {-1, 0}});
    CHECK(m.theta[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(m.theta[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(m.theta[2] == doctest::Approx(1.0).epsilon(1e-12));
    double x[] = {2.0, 0.0};
    CHECK(residual(m, x) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("plane through three z=0 points") {
    auto m = fit(FamilyKind::plane3d, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}});
    double above[] = {0.0, 0.0, 2.0};
    CHECK(residual(m, above) == doctest::Approx(2.0).epsilon(1e-12));
    double on[] = {5.0, 5.0, 0.0};
    CHECK(residual(m, on) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("sphere through four points of the unit sphere") {
    auto m = fit(FamilyKind::sphere3d,
                 {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    CHECK(m.theta[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(m.theta[1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(m.theta[2] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(m.theta[3] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("degenerate minimal samples are rejected") {
    CHECK_THROWS_AS(fit(FamilyKind::line2d, {{1, 1}, {1, 1}}), DegenerateSample);
    CHECK_THROWS_AS(fit(FamilyKind::circle2d, {{0, 0}, {1, 1}, {2, 2}}),
                    DegenerateSample);
    CHECK_THROWS_AS(fit(FamilyKind::plane3d, {{0, 0, 0}, {1, 1, 1}, {2, 2, 2}}),
                    DegenerateSample);
    CHECK_THROWS_AS(
        fit(FamilyKind::sphere3d, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}}),
        DegenerateSample);
    // nine coplanar points constrain a quadric only up to a 4-dim family
    CHECK_THROWS_AS(fit(FamilyKind::quadric3d,
                        {{0, 0, 0},
                         {1, 0, 0},
                         {0, 1, 0},
                         {1, 1, 0},
                         {2, 0, 0},
                         {0, 2, 0},
                         {2, 1, 0},
                         {1, 2, 0},
                         {2, 2, 0}}),
                    DegenerateSample);
}

TEST_CASE("random minimal samples interpolate to 1e-9") {
    const FamilyKind kinds[] = {FamilyKind::line2d, FamilyKind::circle2d,
                                FamilyKind::plane3d, FamilyKind::sphere3d,
                                FamilyKind::quadric3d};
    for (FamilyKind kind : kinds) {
        ModelFamily family{kind};
        Rng rng(derive_seed(20260816, static_cast<std::uint64_t>(kind)));
        const int d = family.ambient_dim();
        const int mss = family.min_sample_size();
        double worst = 0.0;
        int fitted = 0;
        while (fitted < 1000) {
            std::vector<std::vector<double>> pts(mss, std::vector<double>(d));
            for (auto& p : pts)
                for (double& v : p) v = uniform_real(rng, -1.0, 1.0);
            std::vector<PointRef> refs(pts.begin(), pts.end());
            ModelInstance m;
            try {
                m = fit_minimal(family, refs);
            } catch (const DegenerateSample&) {
                continue;
            }
            ++fitted;
            for (const auto& p : pts) worst = std::max(worst, residual(m, p));
        }
        INFO("family ", family.name());
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("residual is invariant under rigid motion") {
    Rng rng(4711);
    for (int trial = 0; trial < 50; ++trial) {
        const double ang = uniform_real(rng, 0.0, 2.0 * std::numbers::pi);
        const double ca = std::cos(ang), sa = std::sin(ang);
        const double tx = uniform_real(rng, -5.0, 5.0);
        const double ty = uniform_real(rng, -5.0, 5.0);
        auto move2 = [&](const std::vector<double>& p) {
            return std::vector<double>{ca * p[0] - sa * p[1] + tx,
                                       sa * p[0] + ca * p[1] + ty};
        };

        std::vector<std::vector<double>> lpts, cpts;
        for (int i = 0; i < 3; ++i)
            cpts.push_back({uniform_real(rng, -1, 1), uniform_real(rng, -1, 1)});
        lpts = {cpts[0], cpts[1]};
        std::vector<double> probe{uniform_real(rng, -1, 1), uniform_real(rng, -1, 1)};

        try {
            auto line = fit(FamilyKind::line2d, lpts);
            auto moved = fit(FamilyKind::line2d, {move2(lpts[0]), move2(lpts[1])});
            auto mp = move2(probe);
            CHECK(residual(line, probe) ==
                  doctest::Approx(residual(moved, mp)).epsilon(1e-9));
            auto circle = fit(FamilyKind::circle2d, cpts);
            auto mcircle = fit(FamilyKind::circle2d,
                               {move2(cpts[0]), move2(cpts[1]), move2(cpts[2])});
            CHECK(residual(circle, probe) ==
                  doctest::Approx(residual(mcircle, mp)).epsilon(1e-9));
        } catch (const DegenerateSample&) {
            continue;
        }
    }

    // planes under a rotation about z plus translation
    Rng rng3(815);
    for (int trial = 0; trial < 50; ++trial) {
        const double ang = uniform_real(rng3, 0.0, 2.0 * std::numbers::pi);
        const double ca = std::cos(ang), sa = std::sin(ang);
        const double tx = uniform_real(rng3, -5, 5), ty = uniform_real(rng3, -5, 5),
                     tz = uniform_real(rng3, -5, 5);
        auto move3 = [&](const std::vector<double>& p) {
            return std::vector<double>{ca * p[0] - sa * p[1] + tx,
                                       sa * p[0] + ca * p[1] + ty, p[2] + tz};
        };
        std::vector<std::vector<double>> pts;
        for (int i = 0; i < 3; ++i)
            pts.push_back({uniform_real(rng3, -1, 1), uniform_real(rng3, -1, 1),
                           uniform_real(rng3, -1, 1)});
        std::vector<double> probe{uniform_real(rng3, -1, 1), uniform_real(rng3, -1, 1),
                                  uniform_real(rng3, -1, 1)};
        try {
            auto plane = fit(FamilyKind::plane3d, pts);
            auto moved =
                fit(FamilyKind::plane3d, {move3(pts[0]), move3(pts[1]), move3(pts[2])});
            auto mp = move3(probe);
            CHECK(residual(plane, probe) ==
                  doctest::Approx(residual(moved, mp)).epsilon(1e-9));
        } catch (const DegenerateSample&) {
            continue;
        }
    }
}

TEST_CASE("sample_models basics") {
    // two line segments worth of points
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 40; ++i) {
        double t = i / 39.0;
        pts.push_back({t, 0.2});
        pts.push_back({0.7, t});
    }
    Matrix data = to_matrix(pts);
    ModelFamily line{FamilyKind::line2d};

    CHECK(sample_models(data, line, 0, 1).empty());

    auto a = sample_models(data, line, 500, 42);
    auto b = sample_models(data, line, 500, 42);
    REQUIRE(a.size() == 500);
    REQUIRE(b.size() == 500);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (int j = 0; j < 3; ++j) CHECK(a[i].theta[j] == b[i].theta[j]);

    auto c = sample_models(data, line, 500, 43);
    bool any_diff = false;
    for (std::size_t i = 0; i < c.size() && !any_diff; ++i)
        any_diff = c[i].theta[0] != a[i].theta[0] || c[i].theta[2] != a[i].theta[2];
    CHECK(any_diff);
}

TEST_CASE("sample_models locality restricts the draw pool") {
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 20; ++i) pts.push_back({i / 19.0, 0.0});
    for (int i = 0; i < 20; ++i) pts.push_back({i / 19.0, 1.0});
    Matrix data = to_matrix(pts);
    std::vector<std::uint32_t> lower(20);
    for (std::uint32_t i = 0; i < 20; ++i) lower[i] = i;

    auto models = sample_models(data, ModelFamily{FamilyKind::line2d}, 100, 7, &lower);
    for (const auto& m : models) {
        // every fitted line must pass through y=0 territory only
        double probe[] = {0.5, 0.0};
        CHECK(residual(m, probe) <= 1e-9);
    }
}

TEST_CASE("pathological input exhausts the retry budget") {
    std::vector<std::vector<double>> pts(30, std::vector<double>{0.5, 0.5});
    Matrix data = to_matrix(pts);
    CHECK_THROWS_AS(sample_models(data, ModelFamily{FamilyKind::line2d}, 3, 99),
                    SamplingExhausted);
    Matrix tiny(1, 2);
    CHECK_THROWS_AS(sample_models(tiny, ModelFamily{FamilyKind::line2d}, 3, 99),
                    SamplingExhausted);
}

} // TEST_SUITE
