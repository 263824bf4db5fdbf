#pragma once

// Vertical registration: tiled RANSAC ground extraction, grid ground model,
// terrain snapping with above-ground offset preservation, and per-cell
// vertical outlier suppression.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <random>
#include <unordered_map>
#include <vector>

#include "georeg/errors.hpp"
#include "georeg/model.hpp"

namespace georeg {

struct ElevParams {
    double tau_h = 0.05;      // initial RANSAC inlier threshold (m)
    double tau_min = 0.02;    // refined threshold floor (m)
    double cell_size = 1.0;   // ground-model grid resolution (m)
    int ransac_iters = 500;   // per tile
    double outlier_k = 2.5;   // Eq-22-style deviation factor
    double tile_size = 25.0;  // 0 disables tiling (single global plane)
    uint64_t seed = 1;
    double min_inlier_ratio = 0.2;
    bool nearest_fallback = true;  // nearest-neighbour terrain sampling at no-data edges
};

struct GroundModel {
    ElevationGrid grid;               // per-cell mean ground height
    std::vector<uint8_t> ground_index;  // per source point: 1 = ground
};

namespace detail {

struct Plane {
    // z = a*x + b*y + c
    double a = 0, b = 0, c = 0;
    double residual(const Point3& p) const { return std::abs(p.z - (a * p.x + b * p.y + c)); }
};

inline bool plane_from_3(const Point3& p0, const Point3& p1, const Point3& p2, Plane& out) {
    const double ux = p1.x - p0.x, uy = p1.y - p0.y, uz = p1.z - p0.z;
    const double vx = p2.x - p0.x, vy = p2.y - p0.y, vz = p2.z - p0.z;
    const double nx = uy * vz - uz * vy;
    const double ny = uz * vx - ux * vz;
    const double nz = ux * vy - uy * vx;
    if (std::abs(nz) < 1e-12) return false;  // vertical or degenerate
    out.a = -nx / nz;
    out.b = -ny / nz;
    out.c = p0.z - out.a * p0.x - out.b * p0.y;
    return true;
}

inline bool plane_least_squares(const std::vector<Point3>& pts, const std::vector<std::size_t>& idx,
                                Plane& out) {
    // Normal equations of z ~ a*x + b*y + c, centered for conditioning.
    double mx = 0, my = 0, mz = 0;
    for (std::size_t i : idx) {
        mx += pts[i].x;
        my += pts[i].y;
        mz += pts[i].z;
    }
    const double n = static_cast<double>(idx.size());
    mx /= n; my /= n; mz /= n;
    double sxx = 0, sxy = 0, syy = 0, sxz = 0, syz = 0;
    for (std::size_t i : idx) {
        const double dx = pts[i].x - mx, dy = pts[i].y - my, dz = pts[i].z - mz;
        sxx += dx * dx; sxy += dx * dy; syy += dy * dy;
        sxz += dx * dz; syz += dy * dz;
    }
    const double det = sxx * syy - sxy * sxy;
    if (std::abs(det) < 1e-12) {
        // Degenerate XY footprint: horizontal plane through the mean.
        out = {0.0, 0.0, mz};
        return true;
    }
    out.a = (syy * sxz - sxy * syz) / det;
    out.b = (sxx * syz - sxy * sxz) / det;
    out.c = mz - out.a * mx - out.b * my;
    return true;
}

// RANSAC plane with threshold refinement: fit at tau, refine by least
// squares on inliers, halve tau while the inlier ratio stays healthy.
inline bool ransac_ground_tile(const std::vector<Point3>& pts, const std::vector<std::size_t>& idx,
                               const ElevParams& params, std::mt19937_64& rng,
                               std::vector<std::size_t>& inliers_out) {
    if (idx.size() < 3) return false;
    std::uniform_int_distribution<std::size_t> pick(0, idx.size() - 1);

    Plane best;
    std::size_t best_count = 0;
    bool found = false;
    for (int it = 0; it < params.ransac_iters; ++it) {
        const std::size_t i0 = idx[pick(rng)], i1 = idx[pick(rng)], i2 = idx[pick(rng)];
        if (i0 == i1 || i1 == i2 || i0 == i2) continue;
        Plane p;
        if (!plane_from_3(pts[i0], pts[i1], pts[i2], p)) continue;
        std::size_t count = 0;
        for (std::size_t i : idx)
            if (p.residual(pts[i]) <= params.tau_h) ++count;
        if (count > best_count) {
            best_count = count;
            best = p;
            found = true;
            if (static_cast<double>(count) >= 0.99 * static_cast<double>(idx.size())) break;
        }
    }
    if (!found || best_count < 3) return false;

    auto inliers_at = [&](const Plane& p, double tau) {
        std::vector<std::size_t> in;
        for (std::size_t i : idx)
            if (p.residual(pts[i]) <= tau) in.push_back(i);
        return in;
    };

    double tau = params.tau_h;
    Plane plane = best;
    std::vector<std::size_t> inliers = inliers_at(plane, tau);
    while (true) {
        Plane refined;
        if (!plane_least_squares(pts, inliers, refined)) break;
        plane = refined;
        inliers = inliers_at(plane, tau);
        const double next_tau = tau / 2.0;
        if (next_tau < params.tau_min) break;
        auto next_in = inliers_at(plane, next_tau);
        if (static_cast<double>(next_in.size()) <
            params.min_inlier_ratio * static_cast<double>(idx.size()))
            break;
        tau = next_tau;
        inliers = std::move(next_in);
        if (inliers.size() < 3) break;
    }
    if (inliers.size() < 3) return false;
    inliers_out = std::move(inliers);
    return true;
}

struct CellKey {
    int64_t x, y;
    bool operator==(const CellKey&) const = default;
};
struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const {
        return static_cast<std::size_t>(static_cast<uint64_t>(k.x) * 73856093ull ^
                                        static_cast<uint64_t>(k.y) * 19349669ull);
    }
};

}  // namespace detail

// Tiled RANSAC ground extraction plus the per-cell mean-height grid over the
// flagged ground points.
inline GroundModel extract_ground_ransac(const PointCloud& cloud, const ElevParams& params) {
    if (cloud.size() < 3) throw TooFewPoints("need at least 3 points");

    double lox = std::numeric_limits<double>::max(), loy = lox;
    double hix = std::numeric_limits<double>::lowest(), hiy = hix;
    for (const auto& p : cloud.points) {
        lox = std::min(lox, p.x); hix = std::max(hix, p.x);
        loy = std::min(loy, p.y); hiy = std::max(hiy, p.y);
    }

    // Tile membership
    std::unordered_map<detail::CellKey, std::vector<std::size_t>, detail::CellKeyHash> tiles;
    if (params.tile_size > 0.0) {
        for (std::size_t i = 0; i < cloud.size(); ++i)
            tiles[{static_cast<int64_t>(std::floor((cloud.points[i].x - lox) / params.tile_size)),
                   static_cast<int64_t>(std::floor((cloud.points[i].y - loy) / params.tile_size))}]
                .push_back(i);
    } else {
        std::vector<std::size_t> all(cloud.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        tiles[{0, 0}] = std::move(all);
    }

    // Deterministic tile order (hash map order is not)
    std::vector<std::pair<detail::CellKey, const std::vector<std::size_t>*>> ordered;
    ordered.reserve(tiles.size());
    for (const auto& [k, v] : tiles) ordered.emplace_back(k, &v);
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        return std::pair(a.first.x, a.first.y) < std::pair(b.first.x, b.first.y);
    });

    GroundModel gm;
    gm.ground_index.assign(cloud.size(), 0);
    bool any = false;
    for (const auto& [key, members] : ordered) {
        // Per-tile seed keeps results independent of which tiles exist.
        std::mt19937_64 rng(params.seed ^ (static_cast<uint64_t>(key.x) * 0x9E3779B97F4A7C15ull) ^
                            (static_cast<uint64_t>(key.y) * 0xC2B2AE3D27D4EB4Full));
        std::vector<std::size_t> inliers;
        if (!detail::ransac_ground_tile(cloud.points, *members, params, rng, inliers)) continue;
        for (std::size_t i : inliers) gm.ground_index[i] = 1;
        any = true;
    }
    if (!any) throw NoGroundFound("no tile produced a plane with >= 3 inliers");

    // Eq-21 grid over ground points.
    GeoTransform geo;
    geo.meters_per_pixel = params.cell_size;
    geo.origin_x = lox;
    geo.origin_y = loy;
    const int w = static_cast<int>(std::floor((hix - lox) / params.cell_size)) + 1;
    const int h = static_cast<int>(std::floor((hiy - loy) / params.cell_size)) + 1;
    gm.grid = ElevationGrid(w, h, geo);
    std::vector<double> sums(static_cast<std::size_t>(w) * h, 0.0);
    std::vector<std::size_t> counts(static_cast<std::size_t>(w) * h, 0);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (!gm.ground_index[i]) continue;
        const int cx = std::clamp(geo.cell_x(cloud.points[i].x), 0, w - 1);
        const int cy = std::clamp(geo.cell_y(cloud.points[i].y), 0, h - 1);
        sums[static_cast<std::size_t>(cy) * w + cx] += cloud.points[i].z;
        ++counts[static_cast<std::size_t>(cy) * w + cx];
    }
    for (std::size_t i = 0; i < sums.size(); ++i)
        if (counts[i] > 0) gm.grid.heights[i] = sums[i] / static_cast<double>(counts[i]);
    return gm;
}

namespace detail {

// Nearest ground-occupied cell height by breadth-first search over cells.
inline double nearest_cell_height(const ElevationGrid& grid, int cx, int cy) {
    if (grid.has_data(cx, cy)) return grid.at(cx, cy);
    std::queue<std::pair<int, int>> q;
    std::vector<uint8_t> seen(static_cast<std::size_t>(grid.width) * grid.height, 0);
    auto push = [&](int x, int y) {
        if (x < 0 || x >= grid.width || y < 0 || y >= grid.height) return;
        auto& s = seen[static_cast<std::size_t>(y) * grid.width + x];
        if (s) return;
        s = 1;
        q.emplace(x, y);
    };
    push(std::clamp(cx, 0, grid.width - 1), std::clamp(cy, 0, grid.height - 1));
    while (!q.empty()) {
        const auto [x, y] = q.front();
        q.pop();
        if (grid.has_data(x, y)) return grid.at(x, y);
        push(x + 1, y);
        push(x - 1, y);
        push(x, y + 1);
        push(x, y - 1);
    }
    return ElevationGrid::no_data;
}

}  // namespace detail

struct TerrainMatchStats {
    std::size_t no_data_points = 0;
};

// Snaps ground z to the terrain; non-ground keeps its offset above the local
// ground surface. Points over terrain no-data are left unchanged.
inline PointCloud match_terrain(const PointCloud& cloud, const GroundModel& gm,
                                const ElevationGrid& terrain, TerrainMatchStats* stats = nullptr,
                                bool nearest_fallback = true) {
    if (cloud.empty()) throw EmptyCloud();
    if (gm.ground_index.size() != cloud.size()) throw Error("ground model built over a different cloud");

    // Overlap check on XY extents.
    double lox = std::numeric_limits<double>::max(), loy = lox;
    double hix = std::numeric_limits<double>::lowest(), hiy = hix;
    for (const auto& p : cloud.points) {
        lox = std::min(lox, p.x); hix = std::max(hix, p.x);
        loy = std::min(loy, p.y); hiy = std::max(hiy, p.y);
    }
    const auto& tg = terrain.geo;
    const double tx0 = tg.origin_x, ty0 = tg.origin_y;
    const double tx1 = tg.origin_x + terrain.width * tg.meters_per_pixel;
    const double ty1 = tg.origin_y + terrain.height * tg.meters_per_pixel;
    if (hix < tx0 || lox > tx1 || hiy < ty0 || loy > ty1)
        throw NoOverlap("cloud extent does not intersect terrain extent");

    PointCloud out = cloud;
    std::size_t missed = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto& p = out.points[i];
        double t = terrain.sample_bilinear(p.x, p.y);
        if (t == ElevationGrid::no_data && nearest_fallback) t = terrain.sample_nearest(p.x, p.y);
        if (t == ElevationGrid::no_data) {
            ++missed;
            continue;
        }
        if (gm.ground_index[i]) {
            p.z = t;
        } else {
            const int cx = gm.grid.geo.cell_x(p.x);
            const int cy = gm.grid.geo.cell_y(p.y);
            const double ground = detail::nearest_cell_height(gm.grid, cx, cy);
            if (ground == ElevationGrid::no_data) {
                ++missed;
                continue;
            }
            p.z = t + (p.z - ground);
        }
    }
    if (stats) stats->no_data_points = missed;
    return out;
}

// Removes ground points whose z deviates from their cell's leave-one-out
// mean by more than k * max(sigma, tau_min/2). Cells holding fewer than 3
// points are exempt. Leave-one-out statistics keep a gross spike from
// masking itself inside its own cell mean.
inline PointCloud suppress_vertical_outliers(const PointCloud& cloud, const GroundModel& gm,
                                             const ElevParams& params) {
    if (gm.ground_index.size() != cloud.size()) throw Error("ground model built over a different cloud");

    const auto& geo = gm.grid.geo;
    std::unordered_map<detail::CellKey, std::vector<std::size_t>, detail::CellKeyHash> cells;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (!gm.ground_index[i]) continue;
        cells[{geo.cell_x(cloud.points[i].x), geo.cell_y(cloud.points[i].y)}].push_back(i);
    }

    std::vector<uint8_t> keep(cloud.size(), 1);
    for (const auto& [key, members] : cells) {
        if (members.size() < 3) continue;
        double sum = 0.0, sum2 = 0.0;
        for (std::size_t i : members) {
            sum += cloud.points[i].z;
            sum2 += cloud.points[i].z * cloud.points[i].z;
        }
        const double n = static_cast<double>(members.size());
        for (std::size_t i : members) {
            const double z = cloud.points[i].z;
            const double mu = (sum - z) / (n - 1.0);
            const double var = std::max(0.0, (sum2 - z * z) / (n - 1.0) - mu * mu);
            const double sigma = std::sqrt(var);
            if (std::abs(z - mu) > params.outlier_k * std::max(sigma, params.tau_min / 2.0))
                keep[i] = 0;
        }
    }

    PointCloud out;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (!keep[i]) continue;
        out.points.push_back(cloud.points[i]);
    }
    if (cloud.labels) {
        std::vector<int32_t> l;
        for (std::size_t i = 0; i < cloud.size(); ++i)
            if (keep[i]) l.push_back((*cloud.labels)[i]);
        out.labels = std::move(l);
    }
    if (cloud.intensities) {
        std::vector<double> v;
        for (std::size_t i = 0; i < cloud.size(); ++i)
            if (keep[i]) v.push_back((*cloud.intensities)[i]);
        out.intensities = std::move(v);
    }
    return out;
}

}  // namespace georeg
