#pragma once

// Binary masks -> single-pixel-wide road skeletons -> keypoint sets.
// Shared by the cloud path (rasterized projection) and the map path
// (HSV-segmented imagery); only the mask source differs.

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "georeg/errors.hpp"
#include "georeg/model.hpp"

namespace georeg {

struct HsvThresholds {
    double h_min = 0.0;    // hue degrees [0, 360)
    double h_max = 360.0;
    double s_max = 0.15;   // saturation fraction
    double v_min = 0.85;   // value fraction
};

struct SkeletonParams {
    double min_branch_len = 10.0;       // pixels (L_min)
    double curvature_threshold = 0.5;   // 1/pixels (kappa_th)
    double component_beta = 0.5;        // component-area filter factor
    double control_point_spacing = 20.0;  // pixels along each branch
};

struct KeypointSet {
    std::vector<Vec2> intersections;   // world coordinates
    std::vector<Vec2> control_points;  // world coordinates
    std::vector<Vec2> corners;         // 4 raster bounding-box corners
};

namespace detail {

struct Hsv {
    double h, s, v;  // degrees, fraction, fraction
};

inline Hsv rgb_to_hsv(uint8_t r8, uint8_t g8, uint8_t b8) {
    const double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double d = mx - mn;
    double h = 0.0;
    if (d > 0.0) {
        if (mx == r)
            h = 60.0 * std::fmod((g - b) / d, 6.0);
        else if (mx == g)
            h = 60.0 * ((b - r) / d + 2.0);
        else
            h = 60.0 * ((r - g) / d + 4.0);
        if (h < 0.0) h += 360.0;
    }
    const double s = mx > 0.0 ? d / mx : 0.0;
    return {h, s, mx};
}

}  // namespace detail

inline BinaryRaster segment_map_hsv(const ColorRaster& rgb, const HsvThresholds& t) {
    if (rgb.width <= 0 || rgb.height <= 0) throw EmptyImage();
    BinaryRaster mask(rgb.width, rgb.height, rgb.geo);
    for (int y = 0; y < rgb.height; ++y)
        for (int x = 0; x < rgb.width; ++x) {
            const uint8_t* px = rgb.pixel(x, y);
            const auto hsv = detail::rgb_to_hsv(px[0], px[1], px[2]);
            if (hsv.h >= t.h_min && hsv.h <= t.h_max && hsv.s <= t.s_max && hsv.v >= t.v_min)
                mask.set(x, y);
        }
    return mask;
}

namespace detail {

// Connected-component labelling; connectivity 8 or 4. Returns labels
// (-1 for pixels not matching `value`) and per-label pixel counts.
inline int label_components(const BinaryRaster& r, uint8_t value, int connectivity,
                            std::vector<int>& labels, std::vector<std::size_t>& areas) {
    labels.assign(r.bits.size(), -1);
    areas.clear();
    static constexpr std::array<std::array<int, 2>, 8> kOff8{{{1, 0}, {-1, 0}, {0, 1}, {0, -1},
                                                              {1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};
    const int noff = connectivity == 8 ? 8 : 4;
    int next = 0;
    std::vector<std::size_t> stack;
    for (int y = 0; y < r.height; ++y)
        for (int x = 0; x < r.width; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * r.width + x;
            if (r.bits[idx] != value || labels[idx] != -1) continue;
            const int id = next++;
            areas.push_back(0);
            stack.assign(1, idx);
            labels[idx] = id;
            while (!stack.empty()) {
                const std::size_t cur = stack.back();
                stack.pop_back();
                ++areas[static_cast<std::size_t>(id)];
                const int cx = static_cast<int>(cur % r.width);
                const int cy = static_cast<int>(cur / r.width);
                for (int o = 0; o < noff; ++o) {
                    const int nx = cx + kOff8[static_cast<std::size_t>(o)][0];
                    const int ny = cy + kOff8[static_cast<std::size_t>(o)][1];
                    if (!r.in_bounds(nx, ny)) continue;
                    const std::size_t nidx = static_cast<std::size_t>(ny) * r.width + nx;
                    if (r.bits[nidx] != value || labels[nidx] != -1) continue;
                    labels[nidx] = id;
                    stack.push_back(nidx);
                }
            }
        }
    return next;
}

}  // namespace detail

// Drops small 8-connected foreground components, then fills small
// 4-connected background holes. Background components touching the raster
// border are never treated as holes.
inline BinaryRaster filter_components_bidirectional(const BinaryRaster& mask, double beta) {
    BinaryRaster out = mask;

    std::vector<int> labels;
    std::vector<std::size_t> areas;
    const int nfg = detail::label_components(out, 1, 8, labels, areas);
    if (nfg > 0) {
        double mean = 0.0;
        for (auto a : areas) mean += static_cast<double>(a);
        mean /= static_cast<double>(nfg);
        for (std::size_t i = 0; i < out.bits.size(); ++i)
            if (out.bits[i] && static_cast<double>(areas[static_cast<std::size_t>(labels[i])]) < beta * mean)
                out.bits[i] = 0;
    }

    const int nbg = detail::label_components(out, 0, 4, labels, areas);
    if (nbg > 0) {
        std::vector<bool> touches_border(static_cast<std::size_t>(nbg), false);
        for (int x = 0; x < out.width; ++x) {
            for (int y : {0, out.height - 1}) {
                const std::size_t idx = static_cast<std::size_t>(y) * out.width + x;
                if (labels[idx] >= 0) touches_border[static_cast<std::size_t>(labels[idx])] = true;
            }
        }
        for (int y = 0; y < out.height; ++y) {
            for (int x : {0, out.width - 1}) {
                const std::size_t idx = static_cast<std::size_t>(y) * out.width + x;
                if (labels[idx] >= 0) touches_border[static_cast<std::size_t>(labels[idx])] = true;
            }
        }
        // The mean covers every background component (border-touching ones
        // included), but only enclosed holes are candidates for filling; a
        // lone interior hole would otherwise never fall below its own mean.
        double mean = 0.0;
        for (auto a : areas) mean += static_cast<double>(a);
        mean /= static_cast<double>(nbg);
        for (std::size_t i = 0; i < out.bits.size(); ++i) {
            if (out.bits[i]) continue;
            const int id = labels[i];
            if (id < 0 || touches_border[static_cast<std::size_t>(id)]) continue;
            if (static_cast<double>(areas[static_cast<std::size_t>(id)]) < beta * mean)
                out.bits[i] = 1;
        }
    }
    return out;
}

// Zhang-Suen iterative thinning.
inline BinaryRaster thin(const BinaryRaster& mask) {
    BinaryRaster out = mask;
    const int w = out.width, h = out.height;
    auto get = [&](int x, int y) -> int {
        return out.in_bounds(x, y) ? out.at(x, y) : 0;
    };

    std::vector<std::size_t> to_clear;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int pass = 0; pass < 2; ++pass) {
            to_clear.clear();
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    if (!get(x, y)) continue;
                    const int p2 = get(x, y - 1), p3 = get(x + 1, y - 1), p4 = get(x + 1, y);
                    const int p5 = get(x + 1, y + 1), p6 = get(x, y + 1), p7 = get(x - 1, y + 1);
                    const int p8 = get(x - 1, y), p9 = get(x - 1, y - 1);
                    const int b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
                    if (b < 2 || b > 6) continue;
                    const int a = (p2 == 0 && p3 == 1) + (p3 == 0 && p4 == 1) + (p4 == 0 && p5 == 1) +
                                  (p5 == 0 && p6 == 1) + (p6 == 0 && p7 == 1) + (p7 == 0 && p8 == 1) +
                                  (p8 == 0 && p9 == 1) + (p9 == 0 && p2 == 1);
                    if (a != 1) continue;
                    if (pass == 0) {
                        if (p2 * p4 * p6 != 0 || p4 * p6 * p8 != 0) continue;
                    } else {
                        if (p2 * p4 * p8 != 0 || p2 * p6 * p8 != 0) continue;
                    }
                    to_clear.push_back(static_cast<std::size_t>(y) * w + x);
                }
            for (std::size_t idx : to_clear) out.bits[idx] = 0;
            changed = changed || !to_clear.empty();
        }
    }
    return out;
}

namespace detail {

static constexpr std::array<std::array<int, 2>, 8> kNeigh8{{{1, 0}, {-1, 0}, {0, 1}, {0, -1},
                                                            {1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};

inline int skeleton_neighbor_count(const BinaryRaster& s, int x, int y) {
    int n = 0;
    for (const auto& o : kNeigh8) {
        const int nx = x + o[0], ny = y + o[1];
        if (s.in_bounds(nx, ny) && s.at(nx, ny)) ++n;
    }
    return n;
}

}  // namespace detail

// Intersection predicate from the 3x3 neighbourhood: more than two skeleton
// neighbours.
inline bool is_intersection_pixel(const BinaryRaster& skel, int x, int y) {
    return skel.at(x, y) && detail::skeleton_neighbor_count(skel, x, y) > 2;
}

inline SkeletonGraph build_skeleton_graph(const BinaryRaster& skel) {
    SkeletonGraph g;
    g.geo = skel.geo;
    g.width = skel.width;
    g.height = skel.height;

    const int w = skel.width, h = skel.height;
    auto idx_of = [&](int x, int y) { return static_cast<std::size_t>(y) * w + x; };

    std::vector<int> node_of(skel.bits.size(), -1);

    // Junction pixels are merged into one node per 8-connected cluster.
    std::vector<uint8_t> junction(skel.bits.size(), 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (skel.at(x, y) && detail::skeleton_neighbor_count(skel, x, y) > 2)
                junction[idx_of(x, y)] = 1;

    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!junction[idx_of(x, y)] || node_of[idx_of(x, y)] != -1) continue;
            const int id = static_cast<int>(g.nodes.size());
            SkeletonNode node;
            node.kind = NodeKind::Intersection;
            std::vector<PixelCoord> stack{{x, y}};
            node_of[idx_of(x, y)] = id;
            while (!stack.empty()) {
                const PixelCoord p = stack.back();
                stack.pop_back();
                node.pixels.push_back(p);
                for (const auto& o : detail::kNeigh8) {
                    const int nx = p.x + o[0], ny = p.y + o[1];
                    if (!skel.in_bounds(nx, ny) || !junction[idx_of(nx, ny)]) continue;
                    if (node_of[idx_of(nx, ny)] != -1) continue;
                    node_of[idx_of(nx, ny)] = id;
                    stack.push_back({nx, ny});
                }
            }
            double sx = 0, sy = 0;
            for (const auto& p : node.pixels) {
                sx += p.x;
                sy += p.y;
            }
            node.pos = {sx / static_cast<double>(node.pixels.size()),
                        sy / static_cast<double>(node.pixels.size())};
            g.nodes.push_back(std::move(node));
        }

    // Endpoints (degree 1) and isolated pixels become their own nodes.
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!skel.at(x, y) || node_of[idx_of(x, y)] != -1) continue;
            const int n = detail::skeleton_neighbor_count(skel, x, y);
            if (n > 1) continue;
            const int id = static_cast<int>(g.nodes.size());
            SkeletonNode node;
            node.kind = NodeKind::Endpoint;
            node.pixels.push_back({x, y});
            node.pos = {static_cast<double>(x), static_cast<double>(y)};
            node_of[idx_of(x, y)] = id;
            g.nodes.push_back(std::move(node));
        }

    // Trace maximal 8-connected paths between nodes through degree-2 pixels.
    std::vector<uint8_t> path_used(skel.bits.size(), 0);
    auto trace = [&](PixelCoord start, PixelCoord first) {
        SkeletonEdge e;
        e.a = node_of[idx_of(start.x, start.y)];
        e.path.push_back(start);
        PixelCoord prev = start, cur = first;
        while (true) {
            e.path.push_back(cur);
            const int cur_node = node_of[idx_of(cur.x, cur.y)];
            if (cur_node != -1) {
                e.b = cur_node;
                break;
            }
            path_used[idx_of(cur.x, cur.y)] = 1;
            PixelCoord next{-1, -1};
            bool found = false;
            for (const auto& o : detail::kNeigh8) {
                const int nx = cur.x + o[0], ny = cur.y + o[1];
                if (!skel.in_bounds(nx, ny) || !skel.at(nx, ny)) continue;
                if (nx == prev.x && ny == prev.y) continue;
                // Do not step back into pixels of the same path already used,
                // except into a node pixel (which terminates the trace).
                if (node_of[idx_of(nx, ny)] == -1 && path_used[idx_of(nx, ny)]) continue;
                // Prefer node pixels, so thick junction clusters terminate
                // the edge instead of being skirted diagonally.
                if (node_of[idx_of(nx, ny)] != -1) {
                    next = {nx, ny};
                    found = true;
                    break;
                }
                if (!found) {
                    next = {nx, ny};
                    found = true;
                }
            }
            if (!found) {
                e.b = -1;  // dead end without a node pixel (should not happen)
                break;
            }
            prev = cur;
            cur = next;
        }
        return e;
    };

    std::vector<uint8_t> stub_done(skel.bits.size() * 8, 0);
    for (int id = 0; id < static_cast<int>(g.nodes.size()); ++id) {
        for (const auto& p : g.nodes[static_cast<std::size_t>(id)].pixels) {
            for (std::size_t o = 0; o < detail::kNeigh8.size(); ++o) {
                const int nx = p.x + detail::kNeigh8[o][0];
                const int ny = p.y + detail::kNeigh8[o][1];
                if (!skel.in_bounds(nx, ny) || !skel.at(nx, ny)) continue;
                const int nn = node_of[idx_of(nx, ny)];
                if (nn == id) continue;  // same junction cluster
                if (nn != -1) {
                    // Direct node-to-node adjacency: register each such edge once.
                    if (nn < id) continue;
                    SkeletonEdge e;
                    e.a = id;
                    e.b = nn;
                    e.path = {p, {nx, ny}};
                    g.edges.push_back(std::move(e));
                    continue;
                }
                if (path_used[idx_of(nx, ny)]) continue;
                g.edges.push_back(trace(p, {nx, ny}));
            }
        }
    }
    (void)stub_done;

    // Cycles with no nodes (rings): anchor one branch node per remaining
    // untraced loop and record the loop as a self-edge.
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t i = idx_of(x, y);
            if (!skel.at(x, y) || node_of[i] != -1 || path_used[i]) continue;
            const int id = static_cast<int>(g.nodes.size());
            SkeletonNode node;
            node.kind = NodeKind::Branch;
            node.pixels.push_back({x, y});
            node.pos = {static_cast<double>(x), static_cast<double>(y)};
            node_of[i] = id;
            g.nodes.push_back(std::move(node));
            for (const auto& o : detail::kNeigh8) {
                const int nx = x + o[0], ny = y + o[1];
                if (!skel.in_bounds(nx, ny) || !skel.at(nx, ny)) continue;
                if (path_used[idx_of(nx, ny)] || node_of[idx_of(nx, ny)] != -1) continue;
                g.edges.push_back(trace({x, y}, {nx, ny}));
                break;  // the loop trace consumes the whole ring
            }
        }

    return g;
}

namespace detail {

// Discrete three-point circumscribed-circle curvature at polyline index i,
// using the points 2 steps away on each side.
inline double curvature_at(const std::vector<PixelCoord>& path, std::size_t i) {
    if (i < 2 || i + 2 >= path.size()) return 0.0;
    const Vec2 a{static_cast<double>(path[i - 2].x), static_cast<double>(path[i - 2].y)};
    const Vec2 b{static_cast<double>(path[i].x), static_cast<double>(path[i].y)};
    const Vec2 c{static_cast<double>(path[i + 2].x), static_cast<double>(path[i + 2].y)};
    const Vec2 ab = b - a, ac = c - a, bc = c - b;
    const double cross = std::abs(ab.cross(ac));
    const double denom = ab.norm() * ac.norm() * bc.norm();
    if (denom < 1e-12) return 0.0;
    return 2.0 * cross / denom;
}

inline double mean_curvature(const std::vector<PixelCoord>& path) {
    if (path.size() < 5) return 0.0;
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 2; i + 2 < path.size(); ++i) {
        sum += curvature_at(path, i);
        ++n;
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

inline BinaryRaster graph_to_raster(const SkeletonGraph& g) {
    BinaryRaster r(g.width, g.height, g.geo);
    for (const auto& n : g.nodes)
        for (const auto& p : n.pixels) r.set(p.x, p.y);
    for (const auto& e : g.edges)
        for (const auto& p : e.path) r.set(p.x, p.y);
    return r;
}

}  // namespace detail

// Removes short, low-curvature spurs (edges hanging off a degree-1 node),
// reclassifying nodes after each sweep, until nothing changes.
inline SkeletonGraph prune_branches(const SkeletonGraph& g, const SkeletonParams& params) {
    BinaryRaster raster = detail::graph_to_raster(g);
    SkeletonGraph cur = build_skeleton_graph(raster);

    while (true) {
        std::vector<int> deg(cur.nodes.size(), 0);
        for (const auto& e : cur.edges) {
            if (e.a >= 0) ++deg[static_cast<std::size_t>(e.a)];
            if (e.b >= 0) ++deg[static_cast<std::size_t>(e.b)];
        }
        bool removed_any = false;
        BinaryRaster next = detail::graph_to_raster(cur);
        for (const auto& e : cur.edges) {
            if (e.a < 0 || e.b < 0) continue;
            const bool a_leaf = deg[static_cast<std::size_t>(e.a)] == 1 &&
                                cur.nodes[static_cast<std::size_t>(e.a)].kind == NodeKind::Endpoint;
            const bool b_leaf = deg[static_cast<std::size_t>(e.b)] == 1 &&
                                cur.nodes[static_cast<std::size_t>(e.b)].kind == NodeKind::Endpoint;
            if (!a_leaf && !b_leaf) continue;
            if (a_leaf && b_leaf) continue;  // whole isolated segment, keep
            if (e.arc_length() >= params.min_branch_len) continue;
            if (detail::mean_curvature(e.path) >= params.curvature_threshold) continue;
            // Clear the spur's interior and its leaf endpoint; keep the
            // junction-side pixel.
            const int leaf = a_leaf ? e.a : e.b;
            for (std::size_t i = 0; i < e.path.size(); ++i) {
                const PixelCoord p = e.path[i];
                const bool terminal_a = i == 0;
                const bool terminal_b = i + 1 == e.path.size();
                const bool is_junction_side = (terminal_a && !a_leaf) || (terminal_b && !b_leaf);
                if (is_junction_side) continue;
                next.set(p.x, p.y, 0);
            }
            for (const auto& p : cur.nodes[static_cast<std::size_t>(leaf)].pixels) next.set(p.x, p.y, 0);
            removed_any = true;
        }
        if (!removed_any) break;
        // Re-thin: removing a spur can leave a junction-cluster pixel as a
        // 1-px bump on the surviving line, which would re-classify as an
        // intersection forever.
        cur = build_skeleton_graph(thin(next));
    }
    return cur;
}

// Keypoints in world coordinates: intersection nodes, arc-length-uniform
// control samples along each edge, and the 4 raster extent corners.
inline KeypointSet extract_keypoints(const SkeletonGraph& g, const SkeletonParams& params) {
    KeypointSet kp;
    for (const auto& n : g.nodes)
        if (n.kind == NodeKind::Intersection)
            kp.intersections.push_back(g.geo.pixel_to_world(n.pos.x, n.pos.y));

    for (const auto& e : g.edges) {
        const double total = e.arc_length();
        double next_s = params.control_point_spacing;
        double acc = 0.0;
        for (std::size_t i = 1; i < e.path.size() && next_s < total; ++i) {
            const Vec2 a{static_cast<double>(e.path[i - 1].x), static_cast<double>(e.path[i - 1].y)};
            const Vec2 b{static_cast<double>(e.path[i].x), static_cast<double>(e.path[i].y)};
            const double seg = (b - a).norm();
            while (next_s <= acc + seg && next_s < total) {
                const double f = (next_s - acc) / seg;
                const Vec2 p = a + (b - a) * f;
                kp.control_points.push_back(g.geo.pixel_to_world(p.x, p.y));
                next_s += params.control_point_spacing;
            }
            acc += seg;
        }
    }

    const GeoTransform& geo = g.geo;
    const double w = g.width * geo.meters_per_pixel;
    const double h = g.height * geo.meters_per_pixel;
    kp.corners = {{geo.origin_x, geo.origin_y},
                  {geo.origin_x + w, geo.origin_y},
                  {geo.origin_x, geo.origin_y + h},
                  {geo.origin_x + w, geo.origin_y + h}};
    return kp;
}

}  // namespace georeg
