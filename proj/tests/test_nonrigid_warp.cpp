#include <catch2/catch_amalgamated.hpp>

#include <georeg/nonrigid_warp.hpp>

#include <cmath>
#include <random>

using namespace georeg;

namespace {

std::vector<Vec2> scatter(std::mt19937& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<Vec2> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back({u(rng), u(rng)});
    return out;
}

}  // namespace

TEST_CASE("match_control_points: nearest within tau, far pairs dropped") {
    std::vector<Vec2> cloud = {{0, 0}, {10, 0}, {100, 100}};
    std::vector<Vec2> map = {{1, 0}, {9, 1}, {500, 500}};
    const auto pairs = match_control_points(cloud, map, 30.0);
    REQUIRE(pairs.sources.size() == 2);
    CHECK(pairs.targets[0].x == 1.0);
    CHECK(pairs.targets[1].x == 9.0);

    // strict inequality at the threshold: distance exactly tau is dropped
    const auto edge = match_control_points({{0, 0}, {50, 50}}, {{5, 0}}, 5.0 + 1e-9);
    CHECK(edge.sources.size() == 1);
    CHECK_THROWS_AS(match_control_points({{0, 0}}, {{5, 0}}, 5.0), NoPairs);
}

TEST_CASE("match_control_points: duplicate targets allowed, empty input throws") {
    const auto pairs = match_control_points({{0, 0}, {1, 0}}, {{0.4, 0}}, 10.0);
    REQUIRE(pairs.sources.size() == 2);
    CHECK(pairs.targets[0].x == pairs.targets[1].x);

    CHECK_THROWS_AS(match_control_points({}, {{0, 0}}, 10.0), EmptyInput);
    CHECK_THROWS_AS(match_control_points({{0, 0}}, {}, 10.0), EmptyInput);
    CHECK_THROWS_AS(match_control_points({{0, 0}}, {{100, 100}}, 1.0), NoPairs);
}

TEST_CASE("fit_rbf: exact at control points") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> jitter(-3.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        ControlPairSet pairs;
        pairs.sources = scatter(rng, 12, 0.0, 200.0);
        for (const auto& s : pairs.sources) pairs.targets.push_back({s.x + jitter(rng), s.y + jitter(rng)});

        const RbfWarp w = fit_rbf(pairs, WarpParams{});
        double scale = 0.0;
        for (std::size_t i = 0; i < pairs.sources.size(); ++i)
            scale = std::max(scale, (pairs.targets[i] - pairs.sources[i]).norm());
        for (std::size_t i = 0; i < pairs.sources.size(); ++i) {
            const Vec2 d = evaluate_warp(w, pairs.sources[i]);
            const Vec2 want = pairs.targets[i] - pairs.sources[i];
            CHECK(std::hypot(d.x - want.x, d.y - want.y) <= 1e-6 * std::max(1.0, scale));
        }
    }
}

TEST_CASE("fit_rbf: pure affine displacement reproduced everywhere") {
    // displacement d(p) = A p + b is representable by the affine term alone;
    // interpolation must reproduce it exactly away from the centers too.
    std::mt19937 rng(5);
    ControlPairSet pairs;
    pairs.sources = scatter(rng, 15, -50.0, 50.0);
    const double A[2][2] = {{0.02, -0.01}, {0.015, 0.03}};
    const Vec2 b{1.5, -2.0};
    for (const auto& s : pairs.sources)
        pairs.targets.push_back({s.x + A[0][0] * s.x + A[0][1] * s.y + b.x,
                                 s.y + A[1][0] * s.x + A[1][1] * s.y + b.y});
    const RbfWarp w = fit_rbf(pairs, WarpParams{});
    std::uniform_real_distribution<double> u(-80.0, 80.0);
    for (int i = 0; i < 50; ++i) {
        const Vec2 p{u(rng), u(rng)};
        const Vec2 d = evaluate_warp(w, p);
        const double ex = A[0][0] * p.x + A[0][1] * p.y + b.x;
        const double ey = A[1][0] * p.x + A[1][1] * p.y + b.y;
        CHECK(std::abs(d.x - ex) < 1e-6);
        CHECK(std::abs(d.y - ey) < 1e-6);
    }
}

TEST_CASE("warp_jacobian matches central finite differences") {
    std::mt19937 rng(123);
    ControlPairSet pairs;
    pairs.sources = scatter(rng, 10, 0.0, 100.0);
    std::uniform_real_distribution<double> jitter(-4.0, 4.0);
    for (const auto& s : pairs.sources) pairs.targets.push_back({s.x + jitter(rng), s.y + jitter(rng)});
    const RbfWarp w = fit_rbf(pairs, WarpParams{});

    std::uniform_real_distribution<double> u(5.0, 95.0);
    const double h = 1e-5;
    for (int i = 0; i < 40; ++i) {
        const Vec2 p{u(rng), u(rng)};
        double J[2][2];
        warp_jacobian(w, p, J);
        const Vec2 dxp = evaluate_warp(w, {p.x + h, p.y});
        const Vec2 dxm = evaluate_warp(w, {p.x - h, p.y});
        const Vec2 dyp = evaluate_warp(w, {p.x, p.y + h});
        const Vec2 dym = evaluate_warp(w, {p.x, p.y - h});
        CHECK(std::abs(J[0][0] - (dxp.x - dxm.x) / (2 * h)) < 1e-4);
        CHECK(std::abs(J[1][0] - (dxp.y - dxm.y) / (2 * h)) < 1e-4);
        CHECK(std::abs(J[0][1] - (dyp.x - dym.x) / (2 * h)) < 1e-4);
        CHECK(std::abs(J[1][1] - (dyp.y - dym.y) / (2 * h)) < 1e-4);
    }
}

TEST_CASE("fit_rbf: degenerate inputs") {
    WarpParams params;
    ControlPairSet two;
    two.sources = {{0, 0}, {1, 1}};
    two.targets = {{0, 1}, {1, 2}};
    CHECK_THROWS_AS(fit_rbf(two, params), SingularSystem);  // affine needs >= 3

    // coincident sources collapse to one pair with the averaged target
    ControlPairSet dup;
    dup.sources = {{0, 0}, {0, 0}, {10, 0}, {0, 10}, {10, 10}};
    dup.targets = {{0, 2}, {0, 4}, {10, 0}, {0, 10}, {10, 10}};
    const RbfWarp w = fit_rbf(dup, params);
    REQUIRE(w.centers.size() == 4);
    const Vec2 d = evaluate_warp(w, {0, 0});
    CHECK(std::abs(d.y - 3.0) < 1e-9);

    params.include_affine = false;
    ControlPairSet empty;
    CHECK_THROWS_AS(fit_rbf(empty, params), SingularSystem);
}

TEST_CASE("evaluate_warp: far-field queries fall back to the affine part") {
    ControlPairSet pairs;
    pairs.sources = {{0, 0}, {10, 0}, {0, 10}, {10, 10}, {5, 5}};
    pairs.targets = {{0, 1}, {10, -1}, {1, 10}, {9, 10}, {5, 5.5}};
    const RbfWarp w = fit_rbf(pairs, WarpParams{});

    // bbox diagonal is ~14.14; beyond 3x that from every center the RBF sum
    // is dropped
    const Vec2 far{5.0 + 200.0, 5.0};
    const Vec2 d = evaluate_warp(w, far);
    const Vec2 aff = evaluate_affine(w, far);
    CHECK(d.x == aff.x);
    CHECK(d.y == aff.y);

    // just inside the limit the kernel still contributes
    const Vec2 near{5.0 + 30.0, 5.0};
    const Vec2 dn = evaluate_warp(w, near);
    const Vec2 an = evaluate_affine(w, near);
    CHECK((dn.x != an.x || dn.y != an.y));
}

TEST_CASE("apply_warp: shifts points by the displacement field, keeps z") {
    ControlPairSet pairs;
    pairs.sources = {{0, 0}, {20, 0}, {0, 20}, {20, 20}};
    pairs.targets = {{1, 0}, {21, 0}, {1, 20}, {21, 20}};  // uniform +1 in x
    const RbfWarp w = fit_rbf(pairs, WarpParams{});

    PointCloud cloud;
    cloud.points.push_back({5.0, 5.0, 3.25});
    cloud.points.push_back({15.0, 10.0, -1.0});
    cloud.labels = std::vector<int32_t>{1, 2};
    const PointCloud out = apply_warp(cloud, w);
    REQUIRE(out.size() == 2);
    CHECK(std::abs(out.points[0].x - 6.0) < 1e-6);
    CHECK(std::abs(out.points[0].y - 5.0) < 1e-6);
    CHECK(out.points[0].z == 3.25);
    REQUIRE(out.labels.has_value());
    CHECK((*out.labels)[0] == 1);
    CHECK(std::abs(out.points[1].x - 16.0) < 1e-6);

    CHECK_THROWS_AS(apply_warp(PointCloud{}, w), EmptyCloud);
}
