#pragma once

// Core domain types shared by all pipeline stages. Everything here is a
// plain value type, immutable by convention once constructed.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "georeg/errors.hpp"

namespace georeg {

constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double squared_norm() const { return x * x + y * y; }
};

inline bool finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }

// Local planar meters frame: x east, y north, z up.
struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec2 xy() const { return {x, y}; }
};

struct PointCloud {
    std::vector<Point3> points;
    std::optional<std::vector<int32_t>> labels;
    std::optional<std::vector<double>> intensities;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }

    bool attributes_consistent() const {
        if (labels && labels->size() != points.size()) return false;
        if (intensities && intensities->size() != points.size()) return false;
        return true;
    }
};

// Isotropic pixel<->world mapping. Pixel centers sit at
// origin + (index + 0.5) * meters_per_pixel, y increasing with row index.
struct GeoTransform {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double meters_per_pixel = 1.0;

    Vec2 pixel_to_world(double px, double py) const {
        return {origin_x + (px + 0.5) * meters_per_pixel,
                origin_y + (py + 0.5) * meters_per_pixel};
    }
    Vec2 world_to_pixel(const Vec2& w) const {
        return {(w.x - origin_x) / meters_per_pixel - 0.5,
                (w.y - origin_y) / meters_per_pixel - 0.5};
    }
    // Integer cell containing a world point.
    int cell_x(double wx) const { return static_cast<int>(std::floor((wx - origin_x) / meters_per_pixel)); }
    int cell_y(double wy) const { return static_cast<int>(std::floor((wy - origin_y) / meters_per_pixel)); }
};

struct BinaryRaster {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> bits;  // row-major, 0 or 1
    GeoTransform geo;

    BinaryRaster() = default;
    BinaryRaster(int w, int h, GeoTransform g = {})
        : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0), geo(g) {}

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
    void set(int x, int y, uint8_t v = 1) { bits[static_cast<std::size_t>(y) * width + x] = v; }
    std::size_t count_set() const {
        std::size_t n = 0;
        for (uint8_t b : bits) n += b;
        return n;
    }
};

struct ColorRaster {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> rgb;  // row-major, 3 bytes per pixel
    GeoTransform geo;

    ColorRaster() = default;
    ColorRaster(int w, int h, GeoTransform g = {})
        : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0), geo(g) {}

    const uint8_t* pixel(int x, int y) const { return &rgb[(static_cast<std::size_t>(y) * width + x) * 3]; }
    uint8_t* pixel(int x, int y) { return &rgb[(static_cast<std::size_t>(y) * width + x) * 3]; }
};

struct PixelCoord {
    int x = 0;
    int y = 0;
    bool operator==(const PixelCoord&) const = default;
};

enum class NodeKind { Endpoint, Branch, Intersection };

struct SkeletonNode {
    Vec2 pos;  // pixel coordinates, fractional after junction merging
    NodeKind kind = NodeKind::Endpoint;
    std::vector<PixelCoord> pixels;
};

struct SkeletonEdge {
    int a = -1;
    int b = -1;
    std::vector<PixelCoord> path;  // 8-connected, includes terminal node pixels

    double arc_length() const {
        double len = 0.0;
        for (std::size_t i = 1; i < path.size(); ++i)
            len += std::hypot(double(path[i].x - path[i - 1].x), double(path[i].y - path[i - 1].y));
        return len;
    }
};

struct SkeletonGraph {
    std::vector<SkeletonNode> nodes;
    std::vector<SkeletonEdge> edges;
    GeoTransform geo;
    int width = 0;
    int height = 0;

    int degree(int node) const {
        int d = 0;
        for (const auto& e : edges) {
            if (e.a == node) ++d;
            if (e.b == node) ++d;  // self-loop counts twice
        }
        return d;
    }
};

// scale * R(theta) about `pivot`, then translate:
//   apply(p) = s * R * (p - pivot) + pivot + translation
struct SimilarityTransform2D {
    double scale = 1.0;
    double rotation_rad = 0.0;  // in (-pi, pi]
    Vec2 translation{};
    Vec2 pivot{};

    static SimilarityTransform2D identity() { return {}; }
};

inline double normalize_angle(double a) {
    a = std::remainder(a, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    return a;
}

inline Vec2 rotate(const Vec2& v, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

inline Vec2 apply_transform(const SimilarityTransform2D& t, const Vec2& p) {
    return rotate((p - t.pivot) * t.scale, t.rotation_rad) + t.pivot + t.translation;
}

inline SimilarityTransform2D inverse(const SimilarityTransform2D& t) {
    SimilarityTransform2D r;
    r.scale = 1.0 / t.scale;
    r.rotation_rad = normalize_angle(-t.rotation_rad);
    r.pivot = t.pivot;
    r.translation = rotate(t.translation * (-1.0 / t.scale), -t.rotation_rad);
    return r;
}

// compose(a, b): applying the result equals applying b, then a.
inline SimilarityTransform2D compose(const SimilarityTransform2D& a, const SimilarityTransform2D& b) {
    SimilarityTransform2D c;
    c.scale = a.scale * b.scale;
    c.rotation_rad = normalize_angle(a.rotation_rad + b.rotation_rad);
    c.pivot = b.pivot;
    const Vec2 b_of_pivot = b.pivot + b.translation;  // b applied to its own pivot
    c.translation = apply_transform(a, b_of_pivot) - b.pivot;
    return c;
}

struct ElevationGrid {
    int width = 0;
    int height = 0;
    double cell_size = 1.0;
    GeoTransform geo;
    std::vector<double> heights;  // row-major

    static constexpr double no_data = std::numeric_limits<double>::lowest();

    ElevationGrid() = default;
    ElevationGrid(int w, int h, GeoTransform g)
        : width(w), height(h), cell_size(g.meters_per_pixel), geo(g),
          heights(static_cast<std::size_t>(w) * h, no_data) {}

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    double at(int x, int y) const { return heights[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) { return heights[static_cast<std::size_t>(y) * width + x]; }

    bool has_data(int x, int y) const { return in_bounds(x, y) && at(x, y) != no_data; }

    // Bilinear sample at a world coordinate; no_data if any corner is missing
    // or the query is outside the grid.
    double sample_bilinear(double wx, double wy) const {
        const Vec2 p = geo.world_to_pixel({wx, wy});
        const int x0 = static_cast<int>(std::floor(p.x));
        const int y0 = static_cast<int>(std::floor(p.y));
        const int x1 = x0 + 1, y1 = y0 + 1;
        if (!has_data(x0, y0) || !has_data(x1, y0) || !has_data(x0, y1) || !has_data(x1, y1))
            return sample_nearest(wx, wy);
        const double fx = p.x - x0, fy = p.y - y0;
        const double top = at(x0, y0) * (1 - fx) + at(x1, y0) * fx;
        const double bot = at(x0, y1) * (1 - fx) + at(x1, y1) * fx;
        return top * (1 - fy) + bot * fy;
    }

    double sample_nearest(double wx, double wy) const {
        const Vec2 p = geo.world_to_pixel({wx, wy});
        const int x = static_cast<int>(std::lround(p.x));
        const int y = static_cast<int>(std::lround(p.y));
        if (!has_data(x, y)) return no_data;
        return at(x, y);
    }
};

struct RbfWarp {
    std::vector<Vec2> centers;
    std::vector<double> weights_x;
    std::vector<double> weights_y;
    // affine[c][0..2] = constant, x, y coefficients of the displacement
    // component c (0 = x, 1 = y).
    double affine[2][3] = {{0, 0, 0}, {0, 0, 0}};
    double epsilon = 0.6;
};

struct AlignmentReport {
    double centerline_mu = 0.0;
    double centerline_sigma = 0.0;
    double outlier_threshold = 0.0;
    std::size_t outlier_count = 0;
    double intersection_offset_mean = 0.0;
    std::size_t matched_intersections = 0;
    double elevation_sigma_before = 0.0;
    double elevation_sigma_after = 0.0;
    double elevation_corr_before = 0.0;
    double elevation_corr_after = 0.0;
    std::vector<double> raw_distances;
    // Post-rigid dispersion kept alongside the final numbers so the
    // rigid-vs-full comparison does not need a second run.
    double centerline_sigma_rigid = 0.0;
    double centerline_mu_rigid = 0.0;
};

}  // namespace georeg
