#include <catch2/catch_amalgamated.hpp>

#include <georeg/raster_skeleton.hpp>
#include <georeg/synth.hpp>

#include <cmath>

using namespace georeg;

TEST_CASE("generate_scene: deterministic for a fixed spec") {
    SceneSpec spec;
    spec.seed = 42;
    spec.noise_xy = 0.05;
    spec.deform_amp = 0.5;
    spec.gt_transform.rotation_rad = 0.3;
    spec.gt_transform.translation = {40.0, -25.0};

    const Scene a = generate_scene(spec);
    const Scene b = generate_scene(spec);
    REQUIRE(a.cloud.size() == b.cloud.size());
    for (std::size_t i = 0; i < a.cloud.size(); ++i) {
        CHECK(a.cloud.points[i].x == b.cloud.points[i].x);
        CHECK(a.cloud.points[i].y == b.cloud.points[i].y);
        CHECK(a.cloud.points[i].z == b.cloud.points[i].z);
    }
    CHECK(a.map.rgb == b.map.rgb);
    CHECK(*a.cloud.labels == *b.cloud.labels);

    SceneSpec other = spec;
    other.seed = 43;
    const Scene c = generate_scene(other);
    bool differs = c.cloud.size() != a.cloud.size();
    for (std::size_t i = 0; !differs && i < a.cloud.size(); ++i)
        differs = a.cloud.points[i].x != c.cloud.points[i].x;
    CHECK(differs);
}

TEST_CASE("generate_scene: truth transform maps cloud landmarks onto map landmarks") {
    SceneSpec spec;
    spec.seed = 7;
    spec.gt_transform.scale = 1.2;
    spec.gt_transform.rotation_rad = -0.4;
    spec.gt_transform.translation = {120.0, 60.0};

    // no deformation, no noise: exact round trip
    const Scene clean = generate_scene(spec);
    REQUIRE(clean.truth.cloud_intersections.size() == clean.truth.map_intersections.size());
    for (std::size_t i = 0; i < clean.truth.map_intersections.size(); ++i) {
        const Vec2 back = apply_transform(clean.truth.gt_transform, clean.truth.cloud_intersections[i]);
        CHECK((back - clean.truth.map_intersections[i]).norm() < 1e-9);
    }
    for (std::size_t i = 0; i < clean.truth.map_control_points.size(); ++i) {
        const Vec2 back = apply_transform(clean.truth.gt_transform, clean.truth.cloud_control_points[i]);
        CHECK((back - clean.truth.map_control_points[i]).norm() < 1e-9);
    }

    // with deformation the residual is bounded by scale * amplitude
    spec.deform_amp = 1.5;
    const Scene warped = generate_scene(spec);
    const double bound = spec.gt_transform.scale * spec.deform_amp * std::sqrt(2.0) + 1e-9;
    for (std::size_t i = 0; i < warped.truth.map_intersections.size(); ++i) {
        const Vec2 back = apply_transform(warped.truth.gt_transform, warped.truth.cloud_intersections[i]);
        CHECK((back - warped.truth.map_intersections[i]).norm() <= bound);
    }
}

TEST_CASE("generate_scene: road points land on the network, labels split road/clutter") {
    SceneSpec spec;
    spec.seed = 11;
    spec.noise_xy = 0.1;
    const Scene scene = generate_scene(spec);
    REQUIRE(scene.cloud.labels.has_value());
    REQUIRE(scene.cloud.labels->size() == scene.cloud.size());

    std::vector<Vec2> temp;
    const auto roads = detail::road_network(spec, temp);
    std::size_t road_n = 0, clutter_n = 0, on_network = 0;
    for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
        const Vec2 m = apply_transform(scene.truth.gt_transform, scene.cloud.points[i].xy());
        double dist = std::numeric_limits<double>::max();
        for (const auto& r : roads) {
            const Vec2 v = r.b - r.a;
            const double lambda = std::clamp((m - r.a).dot(v) / v.squared_norm(), 0.0, 1.0);
            const Vec2 foot{r.a.x + lambda * v.x, r.a.y + lambda * v.y};
            dist = std::min(dist, (m - foot).norm());
        }
        if ((*scene.cloud.labels)[i] == 1) {
            ++road_n;
            if (dist <= spec.road_width / 2.0 + 3.0 * spec.noise_xy + 1e-9) ++on_network;
        } else {
            ++clutter_n;
        }
    }
    CHECK(road_n > 0);
    CHECK(clutter_n > 0);
    CHECK(static_cast<double>(on_network) >= 0.99 * static_cast<double>(road_n));
}

TEST_CASE("generate_scene: map raster segments cleanly with default HSV thresholds") {
    SceneSpec spec;
    spec.seed = 3;
    const Scene scene = generate_scene(spec);
    const BinaryRaster mask = segment_map_hsv(scene.map, HsvThresholds{});

    // every painted road pixel should pass the near-white test, background not
    std::size_t road_px = 0, road_hit = 0, bg_px = 0, bg_hit = 0;
    for (int y = 0; y < scene.map.height; ++y)
        for (int x = 0; x < scene.map.width; ++x) {
            const uint8_t* px = scene.map.pixel(x, y);
            const bool is_road = px[0] > 220;
            if (is_road) {
                ++road_px;
                road_hit += mask.at(x, y);
            } else {
                ++bg_px;
                bg_hit += mask.at(x, y);
            }
        }
    REQUIRE(road_px > 0);
    CHECK(road_hit == road_px);
    CHECK(bg_hit == 0);
    CHECK(bg_px > 0);
}

TEST_CASE("generate_scene: terrain grid matches the analytic surface") {
    SceneSpec spec;
    spec.terrain.kind = TerrainKind::Sine;
    spec.terrain.amplitude = 4.0;
    spec.terrain.wavelength = 150.0;
    spec.terrain.base = 100.0;
    const ElevationGrid grid = make_terrain_grid(spec);
    // bilinear interpolation of a smooth surface on a 10 m grid: small error
    for (double x = 0.0; x <= 300.0; x += 37.0)
        for (double y = 0.0; y <= 300.0; y += 41.0) {
            const double want = terrain_height(spec.terrain, x, y);
            const double got = grid.sample_bilinear(x, y);
            REQUIRE(got != ElevationGrid::no_data);
            CHECK(std::abs(got - want) < 0.25);
        }

    // z values in the cloud carry terrain + bias
    spec.z_bias = 30.0;
    const Scene scene = generate_scene(spec);
    for (std::size_t i = 0; i < 50; ++i) {
        const auto& p = scene.cloud.points[i];
        if ((*scene.cloud.labels)[i] != 1) continue;
        const Vec2 m = apply_transform(scene.truth.gt_transform, p.xy());
        CHECK(std::abs(p.z - (terrain_height(spec.terrain, m.x, m.y) + 30.0)) < 1e-9);
    }
}

TEST_CASE("generate_scene: single-road variant has no intersections") {
    SceneSpec spec;
    spec.single_road = true;
    const Scene scene = generate_scene(spec);
    CHECK(scene.truth.map_intersections.empty());
    CHECK(scene.truth.cloud_intersections.empty());
    CHECK_FALSE(scene.truth.map_control_points.empty());
    CHECK(scene.cloud.size() > 0);
}

TEST_CASE("generate_scene: invalid specs are rejected") {
    SceneSpec bad;
    bad.blocks_x = 0;
    CHECK_THROWS_AS(generate_scene(bad), InvalidSpec);

    bad = SceneSpec{};
    bad.road_width = -1.0;
    CHECK_THROWS_AS(generate_scene(bad), InvalidSpec);

    bad = SceneSpec{};
    bad.deform_amp = 10.0;
    bad.deform_wavelength = 30.0;  // <= 4 * amp
    CHECK_THROWS_AS(generate_scene(bad), InvalidSpec);

    bad = SceneSpec{};
    bad.gt_transform.scale = 0.0;
    CHECK_THROWS_AS(generate_scene(bad), InvalidSpec);
}
