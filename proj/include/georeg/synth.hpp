#pragma once

// Synthetic paired scenes: a grid-city road network, a colored map raster,
// and a LiDAR-like labeled cloud observed under a known similarity
// transform, smooth sinusoidal deformation, noise, and elevation bias.
// Ground truth by construction; the deformation is deliberately outside the
// RBF hypothesis class.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "georeg/errors.hpp"
#include "georeg/model.hpp"

namespace georeg {

enum class TerrainKind { Flat, Ramp, Sine };

struct TerrainSpec {
    TerrainKind kind = TerrainKind::Flat;
    double base = 0.0;        // meters
    double slope = 0.01;      // ramp: dz/dx
    double amplitude = 3.0;   // sine: meters
    double wavelength = 300;  // sine: meters
};

struct SceneSpec {
    uint64_t seed = 1;
    int blocks_x = 3;
    int blocks_y = 3;
    double block_size = 100.0;     // meters
    double road_width = 8.0;       // meters
    double point_density = 8.0;    // points / m^2 on road surfaces
    double noise_xy = 0.0;         // meters std
    SimilarityTransform2D gt_transform;  // cloud frame -> map frame
    double deform_amp = 0.0;       // meters
    double deform_wavelength = 200.0;
    TerrainSpec terrain;
    double z_bias = 0.0;           // meters added to every cloud z
    double map_mpp = 0.512;        // map raster resolution
    double margin = 15.0;          // meters of map border around the network
    bool single_road = false;      // winding-road variant (no intersections)
    double building_fraction = 0.05;  // non-road points as a fraction of road points
};

struct SceneTruth {
    SimilarityTransform2D gt_transform;  // cloud -> map world
    std::vector<Vec2> map_intersections;
    std::vector<Vec2> cloud_intersections;   // deformed, cloud frame
    std::vector<Vec2> map_control_points;
    std::vector<Vec2> cloud_control_points;  // deformed, cloud frame
    TerrainSpec terrain;
    double z_bias = 0.0;
    double deform_amp = 0.0;
    double deform_wavelength = 0.0;
};

struct Scene {
    ColorRaster map;
    SkeletonGraph truth_skeleton;  // exact road centerlines in map pixel space
    PointCloud cloud;
    SceneTruth truth;
};

inline double terrain_height(const TerrainSpec& t, double x, double y) {
    switch (t.kind) {
        case TerrainKind::Flat: return t.base;
        case TerrainKind::Ramp: return t.base + t.slope * x;
        case TerrainKind::Sine:
            return t.base + t.amplitude * std::sin(2.0 * kPi * x / t.wavelength) *
                                std::sin(2.0 * kPi * y / t.wavelength);
    }
    return t.base;
}

// Smooth bounded displacement applied in the cloud frame.
inline Vec2 scene_deformation(const SceneSpec& spec, const Vec2& p) {
    if (spec.deform_amp == 0.0) return {0.0, 0.0};
    const double w = 2.0 * kPi / spec.deform_wavelength;
    return {spec.deform_amp * std::sin(w * p.y), spec.deform_amp * std::sin(w * p.x)};
}

// Analytic terrain sampled into an Esri-style grid covering the map extent.
inline ElevationGrid make_terrain_grid(const SceneSpec& spec, double cell = 10.0) {
    const double ext_x = spec.blocks_x * spec.block_size + 2.0 * spec.margin;
    const double ext_y = spec.blocks_y * spec.block_size + 2.0 * spec.margin;
    GeoTransform geo;
    geo.meters_per_pixel = cell;
    geo.origin_x = -spec.margin - cell;  // one-cell apron so bilinear covers the edges
    geo.origin_y = -spec.margin - cell;
    const int w = static_cast<int>(std::ceil(ext_x / cell)) + 3;
    const int h = static_cast<int>(std::ceil(ext_y / cell)) + 3;
    ElevationGrid grid(w, h, geo);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const Vec2 c = geo.pixel_to_world(x, y);
            grid.at(x, y) = terrain_height(spec.terrain, c.x, c.y);
        }
    return grid;
}

namespace detail {

struct RoadSegment {
    Vec2 a, b;  // centerline endpoints, map world
};

inline std::vector<RoadSegment> road_network(const SceneSpec& spec, std::vector<Vec2>& intersections) {
    std::vector<RoadSegment> roads;
    const double W = spec.blocks_x * spec.block_size;
    const double H = spec.blocks_y * spec.block_size;
    if (spec.single_road) {
        // One winding road: a zig-zag across the extent, no intersections.
        const int legs = 4;
        Vec2 prev{0.0, 0.0};
        for (int i = 1; i <= legs; ++i) {
            const Vec2 next{W * static_cast<double>(i) / legs, (i % 2 == 1) ? H : 0.0};
            roads.push_back({prev, next});
            prev = next;
        }
        return roads;
    }
    // Randomize the block spacings (deterministically from the seed) so the
    // network has no rotational self-symmetry; a uniform grid would make the
    // recovered alignment ambiguous up to 90/180-degree rotations, and
    // line-position jitter alone leaves near-ties at realistic match radii.
    std::mt19937_64 rng(spec.seed * 0x9E3779B97F4A7C15ull + 0x632BE59BD9B4E019ull);
    std::uniform_real_distribution<double> gap(0.7, 1.3);
    auto lines = [&](int blocks, double span) {
        std::vector<double> v{0.0};
        for (int i = 0; i < blocks; ++i) v.push_back(v.back() + gap(rng) * spec.block_size);
        for (double& x : v) x *= span / v.back();  // keep the nominal extent
        return v;
    };
    const std::vector<double> xs = lines(spec.blocks_x, W);
    const std::vector<double> ys = lines(spec.blocks_y, H);
    for (double x : xs) roads.push_back({{x, ys.front()}, {x, ys.back()}});
    for (double y : ys) roads.push_back({{xs.front(), y}, {xs.back(), y}});
    for (double x : xs)
        for (double y : ys) intersections.push_back({x, y});
    return roads;
}

}  // namespace detail

inline Scene generate_scene(const SceneSpec& spec) {
    if (spec.blocks_x < 1 || spec.blocks_y < 1 || spec.block_size <= 0.0 || spec.road_width <= 0.0 ||
        spec.point_density <= 0.0 || spec.map_mpp <= 0.0)
        throw InvalidSpec("sizes and densities must be positive");
    if (spec.deform_amp > 0.0 && spec.deform_wavelength <= 4.0 * spec.deform_amp)
        throw InvalidSpec("deform_wavelength must exceed 4 * deform_amp");
    if (!(spec.gt_transform.scale > 0.0)) throw InvalidSpec("gt scale must be positive");

    Scene scene;
    scene.truth.gt_transform = spec.gt_transform;
    scene.truth.terrain = spec.terrain;
    scene.truth.z_bias = spec.z_bias;
    scene.truth.deform_amp = spec.deform_amp;
    scene.truth.deform_wavelength = spec.deform_wavelength;

    std::vector<Vec2> intersections;
    const auto roads = detail::road_network(spec, intersections);
    scene.truth.map_intersections = intersections;

    // --- map raster ---
    const double W = spec.blocks_x * spec.block_size;
    const double H = spec.blocks_y * spec.block_size;
    GeoTransform geo;
    geo.meters_per_pixel = spec.map_mpp;
    geo.origin_x = -spec.margin;
    geo.origin_y = -spec.margin;
    const int img_w = static_cast<int>(std::ceil((W + 2.0 * spec.margin) / spec.map_mpp));
    const int img_h = static_cast<int>(std::ceil((H + 2.0 * spec.margin) / spec.map_mpp));
    scene.map = ColorRaster(img_w, img_h, geo);
    const uint8_t bg[3] = {168, 204, 136};    // saturated enough to be rejected
    const uint8_t road[3] = {242, 242, 242};  // near-white
    for (int y = 0; y < img_h; ++y)
        for (int x = 0; x < img_w; ++x) {
            uint8_t* px = scene.map.pixel(x, y);
            px[0] = bg[0];
            px[1] = bg[1];
            px[2] = bg[2];
        }
    const double half = spec.road_width / 2.0;
    for (const auto& r : roads) {
        const Vec2 d = r.b - r.a;
        const double len = d.norm();
        const Vec2 u = d * (1.0 / len);
        // Paint all pixels within half-width of the centerline segment.
        const double lox = std::min(r.a.x, r.b.x) - half, hix = std::max(r.a.x, r.b.x) + half;
        const double loy = std::min(r.a.y, r.b.y) - half, hiy = std::max(r.a.y, r.b.y) + half;
        const int px0 = std::max(0, geo.cell_x(lox)), px1 = std::min(img_w - 1, geo.cell_x(hix));
        const int py0 = std::max(0, geo.cell_y(loy)), py1 = std::min(img_h - 1, geo.cell_y(hiy));
        for (int y = py0; y <= py1; ++y)
            for (int x = px0; x <= px1; ++x) {
                const Vec2 c = geo.pixel_to_world(x, y);
                const Vec2 rel = c - r.a;
                const double along = std::clamp(rel.dot(u), 0.0, len);
                const Vec2 foot = r.a + u * along;
                if ((c - foot).norm() <= half) {
                    uint8_t* px = scene.map.pixel(x, y);
                    px[0] = road[0];
                    px[1] = road[1];
                    px[2] = road[2];
                }
            }
    }

    // --- truth skeleton (exact centerlines, pixel space) ---
    scene.truth_skeleton.geo = geo;
    scene.truth_skeleton.width = img_w;
    scene.truth_skeleton.height = img_h;
    for (const auto& ip : intersections) {
        SkeletonNode n;
        n.kind = NodeKind::Intersection;
        n.pos = geo.world_to_pixel(ip);
        scene.truth_skeleton.nodes.push_back(n);
    }
    for (const auto& r : roads) {
        SkeletonEdge e;
        const Vec2 pa = geo.world_to_pixel(r.a);
        const Vec2 pb = geo.world_to_pixel(r.b);
        e.path.push_back({static_cast<int>(std::lround(pa.x)), static_cast<int>(std::lround(pa.y))});
        e.path.push_back({static_cast<int>(std::lround(pb.x)), static_cast<int>(std::lround(pb.y))});
        scene.truth_skeleton.edges.push_back(e);
    }

    // --- truth control points: every 20 m along each road ---
    const double spacing = 20.0;
    for (const auto& r : roads) {
        const Vec2 d = r.b - r.a;
        const double len = d.norm();
        for (double s = spacing; s < len; s += spacing)
            scene.truth.map_control_points.push_back(r.a + d * (s / len));
    }

    // --- cloud ---
    const SimilarityTransform2D inv = inverse(spec.gt_transform);
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto map_to_cloud = [&](const Vec2& m) {
        const Vec2 c = apply_transform(inv, m);
        return c + scene_deformation(spec, c);
    };

    PointCloud& cloud = scene.cloud;
    cloud.labels = std::vector<int32_t>();
    std::size_t road_points = 0;
    for (const auto& r : roads) {
        const Vec2 d = r.b - r.a;
        const double len = d.norm();
        const Vec2 u = d * (1.0 / len);
        const Vec2 nrm{-u.y, u.x};
        const double area = len * spec.road_width;
        const std::size_t n = static_cast<std::size_t>(std::llround(area * spec.point_density));
        for (std::size_t i = 0; i < n; ++i) {
            const double along = unit(rng) * len;
            const double across = (unit(rng) - 0.5) * spec.road_width;
            const Vec2 m = r.a + u * along + nrm * across;
            Vec2 c = map_to_cloud(m);
            if (spec.noise_xy > 0.0) {
                c.x += gauss(rng) * spec.noise_xy;
                c.y += gauss(rng) * spec.noise_xy;
            }
            const double z = terrain_height(spec.terrain, m.x, m.y) + spec.z_bias;
            cloud.points.push_back({c.x, c.y, z});
            cloud.labels->push_back(1);
            ++road_points;
        }
    }
    // Non-road clutter: block-interior "building" points above ground.
    const std::size_t n_bldg =
        static_cast<std::size_t>(static_cast<double>(road_points) * spec.building_fraction);
    for (std::size_t i = 0; i < n_bldg; ++i) {
        const Vec2 m{unit(rng) * W, unit(rng) * H};
        Vec2 c = map_to_cloud(m);
        const double z = terrain_height(spec.terrain, m.x, m.y) + spec.z_bias + 3.0 + unit(rng) * 12.0;
        cloud.points.push_back({c.x, c.y, z});
        cloud.labels->push_back(0);
    }

    for (const auto& ip : intersections)
        scene.truth.cloud_intersections.push_back(map_to_cloud(ip));
    for (const auto& cp : scene.truth.map_control_points)
        scene.truth.cloud_control_points.push_back(map_to_cloud(cp));

    if (cloud.empty()) throw InvalidSpec("scene produced no points");
    return scene;
}

}  // namespace georeg
