#pragma once

// Exact nearest-neighbour queries over 3D point sets, backed by a
// Boost.Geometry R-tree. Results are exact, not approximate.

#include <algorithm>
#include <cstddef>
#include <unordered_map>
#include <vector>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "georeg/model.hpp"

namespace georeg {

class KnnIndex3 {
public:
    explicit KnnIndex3(const std::vector<Point3>& pts) {
        std::vector<Entry> entries;
        entries.reserve(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i)
            entries.emplace_back(BPoint(pts[i].x, pts[i].y, pts[i].z), i);
        tree_ = Tree(entries.begin(), entries.end());
    }

    // Indices of the k nearest neighbours of pts[query], excluding the query
    // point itself (but not coincident duplicates at other indices).
    std::vector<std::size_t> k_nearest(const Point3& q, std::size_t self, std::size_t k) const {
        namespace bgi = boost::geometry::index;
        std::vector<Entry> hits;
        tree_.query(bgi::nearest(BPoint(q.x, q.y, q.z), static_cast<unsigned>(k + 1)),
                    std::back_inserter(hits));
        std::vector<std::size_t> out;
        out.reserve(k);
        // rtree returns nearest-first is not guaranteed across versions; sort.
        std::sort(hits.begin(), hits.end(), [&](const Entry& a, const Entry& b) {
            const double da = boost::geometry::comparable_distance(a.first, BPoint(q.x, q.y, q.z));
            const double db = boost::geometry::comparable_distance(b.first, BPoint(q.x, q.y, q.z));
            if (da != db) return da < db;
            return a.second < b.second;
        });
        for (const auto& e : hits) {
            if (e.second == self) continue;
            out.push_back(e.second);
            if (out.size() == k) break;
        }
        return out;
    }

    std::vector<std::size_t> radius(const Point3& q, double r) const {
        namespace bg = boost::geometry;
        namespace bgi = boost::geometry::index;
        const BBox box(BPoint(q.x - r, q.y - r, q.z - r), BPoint(q.x + r, q.y + r, q.z + r));
        std::vector<Entry> hits;
        tree_.query(bgi::intersects(box), std::back_inserter(hits));
        std::vector<std::size_t> out;
        const double r2 = r * r;
        for (const auto& e : hits) {
            const double dx = bg::get<0>(e.first) - q.x;
            const double dy = bg::get<1>(e.first) - q.y;
            const double dz = bg::get<2>(e.first) - q.z;
            if (dx * dx + dy * dy + dz * dz <= r2) out.push_back(e.second);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    using BPoint = boost::geometry::model::point<double, 3, boost::geometry::cs::cartesian>;
    using BBox = boost::geometry::model::box<BPoint>;
    using Entry = std::pair<BPoint, std::size_t>;
    using Tree = boost::geometry::index::rtree<Entry, boost::geometry::index::rstar<16>>;

    Tree tree_;
};

// Flat 2D hash grid for fixed-radius membership tests; used by the
// transform-scoring hot loop where point sets are small but queried often.
class Grid2 {
public:
    Grid2(const std::vector<Vec2>& pts, double cell) : cell_(cell), pts_(pts) {
        for (std::size_t i = 0; i < pts.size(); ++i)
            cells_[key(pts[i])].push_back(i);
    }

    // True iff some stored point lies strictly within `r` of q.
    bool any_within(const Vec2& q, double r) const {
        const double r2 = r * r;
        const long cx = coord(q.x), cy = coord(q.y);
        const long span = static_cast<long>(std::ceil(r / cell_));
        for (long dy = -span; dy <= span; ++dy)
            for (long dx = -span; dx <= span; ++dx) {
                auto it = cells_.find(pack(cx + dx, cy + dy));
                if (it == cells_.end()) continue;
                for (std::size_t i : it->second)
                    if ((pts_[i] - q).squared_norm() < r2) return true;
            }
        return false;
    }

private:
    long coord(double v) const { return static_cast<long>(std::floor(v / cell_)); }
    static uint64_t pack(long x, long y) {
        return (static_cast<uint64_t>(static_cast<uint32_t>(x)) << 32) |
               static_cast<uint64_t>(static_cast<uint32_t>(y));
    }
    uint64_t key(const Vec2& p) const { return pack(coord(p.x), coord(p.y)); }

    double cell_;
    std::vector<Vec2> pts_;
    std::unordered_map<uint64_t, std::vector<std::size_t>> cells_;
};

}  // namespace georeg
