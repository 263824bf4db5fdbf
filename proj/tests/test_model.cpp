#include <catch2/catch_amalgamated.hpp>

#include "georeg/model.hpp"

#include <random>

using namespace georeg;

namespace {
std::mt19937_64 rng_of(uint64_t seed) { return std::mt19937_64(seed); }

SimilarityTransform2D random_transform(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SimilarityTransform2D t;
    t.scale = std::exp(u(rng));
    t.rotation_rad = u(rng) * kPi * 0.99;
    t.translation = {u(rng) * 50, u(rng) * 50};
    t.pivot = {u(rng) * 20, u(rng) * 20};
    return t;
}
}  // namespace

TEST_CASE("normalize_angle maps into (-pi, pi]") {
    CHECK(normalize_angle(kPi) == Catch::Approx(kPi));
    CHECK(normalize_angle(-kPi) == Catch::Approx(kPi));
    CHECK(normalize_angle(3 * kPi) == Catch::Approx(kPi));
    CHECK(normalize_angle(2 * kPi) == Catch::Approx(0.0).margin(1e-15));
    CHECK(normalize_angle(0.3) == Catch::Approx(0.3));
    CHECK(normalize_angle(-0.3) == Catch::Approx(-0.3));
}

TEST_CASE("apply_transform basic geometry") {
    SimilarityTransform2D t;
    t.scale = 2.0;
    t.rotation_rad = kPi / 2.0;
    t.translation = {1.0, 0.0};
    const Vec2 p = apply_transform(t, {1.0, 0.0});
    CHECK(p.x == Catch::Approx(1.0).margin(1e-12));
    CHECK(p.y == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("inverse round-trips points") {
    auto rng = rng_of(7);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int i = 0; i < 200; ++i) {
        const auto t = random_transform(rng);
        const auto inv = inverse(t);
        const Vec2 p{u(rng), u(rng)};
        const Vec2 q = apply_transform(inv, apply_transform(t, p));
        CHECK(q.x == Catch::Approx(p.x).margin(1e-8));
        CHECK(q.y == Catch::Approx(p.y).margin(1e-8));
    }
}

TEST_CASE("compose equals sequential application") {
    auto rng = rng_of(11);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int i = 0; i < 200; ++i) {
        const auto a = random_transform(rng);
        const auto b = random_transform(rng);
        const auto c = compose(a, b);
        const Vec2 p{u(rng), u(rng)};
        const Vec2 want = apply_transform(a, apply_transform(b, p));
        const Vec2 got = apply_transform(c, p);
        CHECK(got.x == Catch::Approx(want.x).margin(1e-7));
        CHECK(got.y == Catch::Approx(want.y).margin(1e-7));
    }
}

TEST_CASE("GeoTransform pixel/world round-trip and cell mapping") {
    GeoTransform g;
    g.origin_x = 10.0;
    g.origin_y = -5.0;
    g.meters_per_pixel = 0.512;
    const Vec2 w = g.pixel_to_world(3, 7);
    CHECK(w.x == Catch::Approx(10.0 + 3.5 * 0.512));
    CHECK(w.y == Catch::Approx(-5.0 + 7.5 * 0.512));
    const Vec2 p = g.world_to_pixel(w);
    CHECK(p.x == Catch::Approx(3.0));
    CHECK(p.y == Catch::Approx(7.0));
    CHECK(g.cell_x(w.x) == 3);
    CHECK(g.cell_y(w.y) == 7);
}

TEST_CASE("ElevationGrid bilinear interpolation") {
    GeoTransform g;
    g.meters_per_pixel = 1.0;
    ElevationGrid grid(2, 2, g);
    grid.at(0, 0) = 0.0;
    grid.at(1, 0) = 1.0;
    grid.at(0, 1) = 2.0;
    grid.at(1, 1) = 3.0;
    // center of the 4 cell centers
    CHECK(grid.sample_bilinear(1.0, 1.0) == Catch::Approx(1.5));
    // exactly on a cell center
    CHECK(grid.sample_bilinear(0.5, 0.5) == Catch::Approx(0.0));
    // outside: nearest fallback then no_data
    CHECK(grid.sample_nearest(-10.0, 0.5) == ElevationGrid::no_data);
}

TEST_CASE("ElevationGrid missing corner falls back to nearest") {
    GeoTransform g;
    g.meters_per_pixel = 1.0;
    ElevationGrid grid(2, 2, g);
    grid.at(0, 0) = 1.0;
    grid.at(1, 0) = 1.0;
    grid.at(0, 1) = 1.0;  // (1,1) stays no_data
    CHECK(grid.sample_bilinear(0.9, 0.9) == Catch::Approx(1.0));
}
