#pragma once

// Registration quality without ground truth: centerline distance statistics
// via mirrored-normal fitting, intersection offsets, elevation correlation.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "georeg/errors.hpp"
#include "georeg/model.hpp"

namespace georeg {

struct Segment2 {
    Vec2 a;
    Vec2 b;
};

struct CenterlineSet {
    std::vector<Segment2> segments;
};

struct DistanceStats {
    double mu_hat = 0.0;
    double sigma_hat = 0.0;
    double tau_outlier = 0.0;
    std::vector<double> distances;
};

// Perpendicular distance when the projection falls inside the segment,
// nearest-endpoint distance otherwise.
inline double point_to_segment_distance(const Vec2& p, const Segment2& seg) {
    const Vec2 v = seg.b - seg.a;
    const double vv = v.squared_norm();
    if (vv <= 0.0) throw DegenerateSegment("zero-length segment");
    const double lambda = (p - seg.a).dot(v) / vv;
    if (lambda >= 0.0 && lambda <= 1.0)
        return std::abs(v.cross(p - seg.a)) / std::sqrt(vv);
    return std::min((p - seg.a).norm(), (p - seg.b).norm());
}

inline std::vector<double> centerline_distances(const std::vector<Vec2>& traj,
                                                const CenterlineSet& centerlines) {
    if (traj.empty() || centerlines.segments.empty()) throw EmptyInput("empty trajectory or centerlines");
    std::vector<double> out;
    out.reserve(traj.size());
    for (const auto& p : traj) {
        double best = std::numeric_limits<double>::max();
        for (const auto& s : centerlines.segments)
            best = std::min(best, point_to_segment_distance(p, s));
        out.push_back(best);
    }
    return out;
}

// MLE of a normal fitted to the mirrored sample {d} U {-d}; the mean is 0 by
// symmetry and sigma has the closed form sqrt(mean of d^2).
inline DistanceStats fit_mirrored_normal(const std::vector<double>& distances) {
    if (distances.size() < 2) throw TooFewSamples("need >= 2 distances");
    double sum2 = 0.0;
    for (double d : distances) sum2 += d * d;
    DistanceStats s;
    s.mu_hat = 0.0;
    s.sigma_hat = std::sqrt(sum2 / static_cast<double>(distances.size()));
    s.tau_outlier = s.mu_hat + 2.0 * s.sigma_hat;
    s.distances = distances;
    return s;
}

// One-to-one correspondence by mutual nearest neighbour within radius delta.
inline std::pair<double, std::size_t> intersection_offset(const std::vector<Vec2>& pc_int,
                                                          const std::vector<Vec2>& map_int,
                                                          double delta) {
    if (pc_int.empty() || map_int.empty()) throw EmptyInput("empty intersection set");
    auto nearest = [](const Vec2& p, const std::vector<Vec2>& set) {
        std::size_t best = 0;
        double bd = std::numeric_limits<double>::max();
        for (std::size_t i = 0; i < set.size(); ++i) {
            const double d = (p - set[i]).squared_norm();
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        return std::pair(best, std::sqrt(bd));
    };
    double sum = 0.0;
    std::size_t matched = 0;
    for (std::size_t i = 0; i < pc_int.size(); ++i) {
        const auto [j, dij] = nearest(pc_int[i], map_int);
        if (dij > delta) continue;
        const auto [back, dji] = nearest(map_int[j], pc_int);
        if (back != i) continue;
        sum += dij;
        ++matched;
    }
    if (matched == 0) throw NoMatches("no mutual nearest neighbours within delta");
    return {sum / static_cast<double>(matched), matched};
}

inline double elevation_correlation(const std::vector<double>& sample_z,
                                    const std::vector<double>& reference_z) {
    if (sample_z.size() != reference_z.size() || sample_z.size() < 2)
        throw EmptyInput("need equal-length series of >= 2 samples");
    const double n = static_cast<double>(sample_z.size());
    double ms = 0.0, mr = 0.0;
    for (std::size_t i = 0; i < sample_z.size(); ++i) {
        ms += sample_z[i];
        mr += reference_z[i];
    }
    ms /= n;
    mr /= n;
    double css = 0.0, crr = 0.0, csr = 0.0;
    for (std::size_t i = 0; i < sample_z.size(); ++i) {
        const double ds = sample_z[i] - ms, dr = reference_z[i] - mr;
        css += ds * ds;
        crr += dr * dr;
        csr += ds * dr;
    }
    if (css <= 0.0 || crr <= 0.0) throw ZeroVariance("constant series");
    return csr / std::sqrt(css * crr);
}

// Douglas-Peucker polyline simplification used when turning skeleton edges
// into centerline segments.
inline std::vector<Vec2> simplify_polyline(const std::vector<Vec2>& pts, double tol) {
    if (pts.size() < 3) return pts;
    std::vector<uint8_t> keep(pts.size(), 0);
    keep.front() = keep.back() = 1;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, pts.size() - 1}};
    while (!stack.empty()) {
        const auto [lo, hi] = stack.back();
        stack.pop_back();
        if (hi <= lo + 1) continue;
        const Segment2 seg{pts[lo], pts[hi]};
        double worst = -1.0;
        std::size_t worst_i = lo;
        for (std::size_t i = lo + 1; i < hi; ++i) {
            const double d = point_to_segment_distance(pts[i], seg);
            if (d > worst) {
                worst = d;
                worst_i = i;
            }
        }
        if (worst > tol) {
            keep[worst_i] = 1;
            stack.emplace_back(lo, worst_i);
            stack.emplace_back(worst_i, hi);
        }
    }
    std::vector<Vec2> out;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (keep[i]) out.push_back(pts[i]);
    return out;
}

// Map skeleton edges -> world-space centerline segments (1-px simplification
// tolerance before segmentation).
inline CenterlineSet centerlines_from_graph(const SkeletonGraph& g, double tol_px = 1.0) {
    CenterlineSet cs;
    for (const auto& e : g.edges) {
        std::vector<Vec2> poly;
        poly.reserve(e.path.size());
        for (const auto& p : e.path)
            poly.push_back(g.geo.pixel_to_world(p.x, p.y));
        const auto simple = simplify_polyline(poly, tol_px * g.geo.meters_per_pixel);
        for (std::size_t i = 1; i < simple.size(); ++i) {
            if ((simple[i] - simple[i - 1]).squared_norm() <= 0.0) continue;
            cs.segments.push_back({simple[i - 1], simple[i]});
        }
    }
    return cs;
}

}  // namespace georeg
