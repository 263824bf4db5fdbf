#pragma once

// Raw labeled LiDAR cloud -> clean, downsampled road cloud -> 2D raster.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "georeg/errors.hpp"
#include "georeg/knn.hpp"
#include "georeg/model.hpp"

namespace georeg {

struct PrepParams {
    double alpha = 1.0;        // voxel scale factor
    int k_neighbors = 20;
    double beta_std = 2.5;     // outlier std multiplier
    double gamma_eps = 1.8;    // DBSCAN radius scale
    int min_pts = 17;          // DBSCAN minimum cluster size
    double raster_mpp = 1.0;   // meters per pixel for projection
};

inline PointCloud select_road_points(const PointCloud& cloud, int32_t road_label) {
    if (!cloud.labels) throw NoLabels("cloud has no labels");
    PointCloud out;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if ((*cloud.labels)[i] != road_label) continue;
        out.points.push_back(cloud.points[i]);
    }
    if (out.empty()) throw EmptyResult("no points with the road label");
    out.labels = std::vector<int32_t>(out.size(), road_label);
    if (cloud.intensities) {
        std::vector<double> in;
        for (std::size_t i = 0; i < cloud.size(); ++i)
            if ((*cloud.labels)[i] == road_label) in.push_back((*cloud.intensities)[i]);
        out.intensities = std::move(in);
    }
    return out;
}

namespace detail {

struct Bounds3 {
    Point3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
              std::numeric_limits<double>::max()};
    Point3 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(),
              std::numeric_limits<double>::lowest()};
};

inline Bounds3 bounds(const PointCloud& cloud) {
    Bounds3 b;
    for (const auto& p : cloud.points) {
        b.lo.x = std::min(b.lo.x, p.x); b.hi.x = std::max(b.hi.x, p.x);
        b.lo.y = std::min(b.lo.y, p.y); b.hi.y = std::max(b.hi.y, p.y);
        b.lo.z = std::min(b.lo.z, p.z); b.hi.z = std::max(b.hi.z, p.z);
    }
    return b;
}

inline uint64_t hash3(int64_t x, int64_t y, int64_t z) {
    uint64_t h = static_cast<uint64_t>(x) * 73856093ull;
    h ^= static_cast<uint64_t>(y) * 19349669ull;
    h ^= static_cast<uint64_t>(z) * 83492791ull;
    return h;
}

struct VoxelKey {
    int64_t x, y, z;
    bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
    std::size_t operator()(const VoxelKey& k) const { return hash3(k.x, k.y, k.z); }
};

// Voxel grid anchored at the absolute origin quantized by s, so a second
// pass over the output re-bins every point into the same voxel.
inline VoxelKey voxel_of(const Point3& p, double s) {
    return {static_cast<int64_t>(std::floor(p.x / s)),
            static_cast<int64_t>(std::floor(p.y / s)),
            static_cast<int64_t>(std::floor(p.z / s))};
}

inline PointCloud subset(const PointCloud& cloud, const std::vector<std::size_t>& idx) {
    PointCloud out;
    out.points.reserve(idx.size());
    for (std::size_t i : idx) out.points.push_back(cloud.points[i]);
    if (cloud.labels) {
        std::vector<int32_t> l;
        l.reserve(idx.size());
        for (std::size_t i : idx) l.push_back((*cloud.labels)[i]);
        out.labels = std::move(l);
    }
    if (cloud.intensities) {
        std::vector<double> v;
        v.reserve(idx.size());
        for (std::size_t i : idx) v.push_back((*cloud.intensities)[i]);
        out.intensities = std::move(v);
    }
    return out;
}

}  // namespace detail

// Voxel side length alpha * (vol / n)^(1/3), with degenerate bounding-box
// axes padded to at least 1e-3 m so flat road clouds keep a positive volume.
inline double adaptive_voxel_size(const PointCloud& cloud, double alpha, double pad_floor = 1e-3) {
    if (cloud.empty()) throw EmptyCloud();
    const auto b = detail::bounds(cloud);
    double ex = b.hi.x - b.lo.x, ey = b.hi.y - b.lo.y, ez = b.hi.z - b.lo.z;
    ex = std::max(ex, pad_floor);
    ey = std::max(ey, pad_floor);
    ez = std::max(ez, pad_floor);
    const double vol = ex * ey * ez;
    return alpha * std::cbrt(vol / static_cast<double>(cloud.size()));
}

// Keeps, per occupied voxel, the input point nearest to the voxel's point
// centroid (first such point on ties). Output is a subset of the input.
inline PointCloud voxel_downsample(const PointCloud& cloud, double s) {
    if (cloud.empty()) throw EmptyCloud();
    if (!(s > 0.0)) throw Error("voxel size must be positive");

    struct Cell {
        double sx = 0, sy = 0, sz = 0;
        std::vector<std::size_t> members;
    };
    std::unordered_map<detail::VoxelKey, Cell, detail::VoxelKeyHash> cells;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        auto& c = cells[detail::voxel_of(cloud.points[i], s)];
        c.sx += cloud.points[i].x;
        c.sy += cloud.points[i].y;
        c.sz += cloud.points[i].z;
        c.members.push_back(i);
    }

    std::vector<std::size_t> keep;
    keep.reserve(cells.size());
    for (const auto& [key, c] : cells) {
        const double n = static_cast<double>(c.members.size());
        const Point3 centroid{c.sx / n, c.sy / n, c.sz / n};
        std::size_t best = c.members.front();
        double best_d = std::numeric_limits<double>::max();
        for (std::size_t i : c.members) {
            const auto& p = cloud.points[i];
            const double d = (p.x - centroid.x) * (p.x - centroid.x) +
                             (p.y - centroid.y) * (p.y - centroid.y) +
                             (p.z - centroid.z) * (p.z - centroid.z);
            if (d < best_d || (d == best_d && i < best)) {
                best_d = d;
                best = i;
            }
        }
        keep.push_back(best);
    }
    std::sort(keep.begin(), keep.end());
    return detail::subset(cloud, keep);
}

namespace detail {

struct KnnStats {
    double mu = 0.0;     // mean distance to the k nearest neighbours
    double sigma = 0.0;  // population std of those distances
    std::vector<std::size_t> neigh;
};

inline std::vector<KnnStats> knn_stats(const PointCloud& cloud, int k, const KnnIndex3& index) {
    std::vector<KnnStats> stats(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        auto neigh = index.k_nearest(cloud.points[i], i, static_cast<std::size_t>(k));
        double sum = 0.0, sum2 = 0.0;
        for (std::size_t j : neigh) {
            const auto& a = cloud.points[i];
            const auto& b = cloud.points[j];
            const double d = std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                                       (a.z - b.z) * (a.z - b.z));
            sum += d;
            sum2 += d * d;
        }
        const double n = static_cast<double>(neigh.size());
        stats[i].mu = sum / n;
        stats[i].sigma = std::sqrt(std::max(0.0, sum2 / n - stats[i].mu * stats[i].mu));
        stats[i].neigh = std::move(neigh);
    }
    return stats;
}

}  // namespace detail

// Keeps p_i iff mu_i + beta*sigma_i < tau(p_i), with the adaptive threshold
// tau(p_i) = 2 * median of the neighbours' mu values (local density scale).
inline PointCloud remove_statistical_outliers(const PointCloud& cloud, const PrepParams& params) {
    if (cloud.size() <= static_cast<std::size_t>(params.k_neighbors))
        throw TooFewPoints("need more points than k_neighbors");
    const KnnIndex3 index(cloud.points);
    const auto stats = detail::knn_stats(cloud, params.k_neighbors, index);

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        std::vector<double> mus;
        mus.reserve(stats[i].neigh.size());
        for (std::size_t j : stats[i].neigh) mus.push_back(stats[j].mu);
        std::sort(mus.begin(), mus.end());
        const std::size_t m = mus.size();
        const double median = (m % 2 == 1) ? mus[m / 2] : 0.5 * (mus[m / 2 - 1] + mus[m / 2]);
        const double tau = 2.0 * median;
        if (stats[i].mu + params.beta_std * stats[i].sigma < tau) keep.push_back(i);
    }
    return detail::subset(cloud, keep);
}

// DBSCAN with per-point adaptive radii eps_i = gamma * mean kNN distance.
// Neighbourhood rule is the symmetric one: q is a neighbour of p iff
// ||p - q|| <= min(eps_p, eps_q), which keeps the clustering independent of
// input order and stops sparse far-away points from swallowing dense
// clusters through their inflated radii. Neighbour counts include the point
// itself. Clusters below min_pts are dropped.
inline PointCloud filter_clusters_dbscan(const PointCloud& cloud, const PrepParams& params) {
    if (cloud.size() < static_cast<std::size_t>(params.min_pts))
        throw TooFewPoints("fewer points than min_pts");
    const std::size_t n = cloud.size();
    const KnnIndex3 index(cloud.points);
    const int k = std::min<int>(params.k_neighbors, static_cast<int>(n) - 1);
    const auto stats = detail::knn_stats(cloud, k, index);

    std::vector<double> eps(n);
    for (std::size_t i = 0; i < n; ++i) eps[i] = params.gamma_eps * stats[i].mu;

    auto mutual_neighbors = [&](std::size_t i) {
        std::vector<std::size_t> out;
        for (std::size_t j : index.radius(cloud.points[i], eps[i])) {
            const auto& a = cloud.points[i];
            const auto& b = cloud.points[j];
            const double d = std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                                       (a.z - b.z) * (a.z - b.z));
            if (d <= std::min(eps[i], eps[j])) out.push_back(j);
        }
        return out;  // includes i itself
    };

    std::vector<std::vector<std::size_t>> neigh(n);
    std::vector<bool> core(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        neigh[i] = mutual_neighbors(i);
        core[i] = neigh[i].size() >= static_cast<std::size_t>(params.min_pts);
    }

    // Clusters: connected components of cores over the mutual-neighbour
    // graph; border points join the cluster of their nearest core neighbour.
    constexpr int kUnset = -1;
    std::vector<int> cluster(n, kUnset);
    int next_cluster = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!core[i] || cluster[i] != kUnset) continue;
        const int id = next_cluster++;
        std::vector<std::size_t> stack{i};
        cluster[i] = id;
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            for (std::size_t q : neigh[p]) {
                if (!core[q] || cluster[q] != kUnset) continue;
                cluster[q] = id;
                stack.push_back(q);
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i] || cluster[i] != kUnset) continue;
        double best_d = std::numeric_limits<double>::max();
        int best_c = kUnset;
        for (std::size_t q : neigh[i]) {
            if (!core[q]) continue;
            const auto& a = cloud.points[i];
            const auto& b = cloud.points[q];
            const double d = (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                             (a.z - b.z) * (a.z - b.z);
            if (d < best_d || (d == best_d && cluster[q] < best_c)) {
                best_d = d;
                best_c = cluster[q];
            }
        }
        cluster[i] = best_c;
    }

    std::vector<std::size_t> cluster_size(static_cast<std::size_t>(next_cluster), 0);
    for (std::size_t i = 0; i < n; ++i)
        if (cluster[i] >= 0) ++cluster_size[static_cast<std::size_t>(cluster[i])];

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n; ++i)
        if (cluster[i] >= 0 &&
            cluster_size[static_cast<std::size_t>(cluster[i])] >= static_cast<std::size_t>(params.min_pts))
            keep.push_back(i);
    if (keep.empty()) throw AllFiltered("every cluster fell below min_pts");
    return detail::subset(cloud, keep);
}

// XY occupancy raster over the cloud's bounding box, padded by 2 pixels on
// every side.
inline BinaryRaster rasterize_xy(const PointCloud& cloud, double mpp) {
    if (cloud.empty()) throw EmptyCloud();
    if (!(mpp > 0.0)) throw Error("meters-per-pixel must be positive");
    const auto b = detail::bounds(cloud);
    const int core_w = static_cast<int>(std::floor((b.hi.x - b.lo.x) / mpp)) + 1;
    const int core_h = static_cast<int>(std::floor((b.hi.y - b.lo.y) / mpp)) + 1;
    GeoTransform geo;
    geo.meters_per_pixel = mpp;
    geo.origin_x = b.lo.x - 2.0 * mpp;
    geo.origin_y = b.lo.y - 2.0 * mpp;
    BinaryRaster raster(core_w + 4, core_h + 4, geo);
    for (const auto& p : cloud.points) {
        int px = geo.cell_x(p.x);
        int py = geo.cell_y(p.y);
        px = std::clamp(px, 0, raster.width - 1);
        py = std::clamp(py, 0, raster.height - 1);
        raster.set(px, py);
    }
    return raster;
}

}  // namespace georeg
