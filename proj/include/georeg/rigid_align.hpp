#pragma once

// Global similarity-transform search: candidates from ordered keypoint
// pairs, scored by proximity matching, argmax with deterministic
// tie-breaking.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "georeg/errors.hpp"
#include "georeg/knn.hpp"
#include "georeg/model.hpp"
#include "georeg/raster_skeleton.hpp"

namespace georeg {

struct RigidParams {
    double match_epsilon = 8.0;   // pixels
    double weight_primary = 1.0;  // alpha
    double weight_aux = 0.3;      // beta
    double scale_min = 0.25;
    double scale_max = 4.0;
    std::size_t max_candidates = 200000;
};

struct ScoredTransform {
    SimilarityTransform2D transform;
    double score = 0.0;
    std::size_t matched_primary = 0;
    std::size_t matched_aux = 0;
    bool low_confidence = false;  // set when the corner fallback was used
};

// Similarity mapping the (p2a, p2b) segment onto (p1a, p1b): scale from the
// length ratio, rotation from the orientation difference, translation pinned
// by p2a -> p1a. The rotation sign is fixed by the closure requirement that
// p2b land on p1b.
inline SimilarityTransform2D candidate_from_pairs(const Vec2& p1a, const Vec2& p1b,
                                                  const Vec2& p2a, const Vec2& p2b) {
    const Vec2 d1 = p1b - p1a;
    const Vec2 d2 = p2b - p2a;
    const double n1 = d1.norm(), n2 = d2.norm();
    if (n1 <= 0.0 || n2 <= 0.0) throw DegeneratePair("zero-length keypoint pair");
    SimilarityTransform2D t;
    t.scale = n1 / n2;
    t.rotation_rad = normalize_angle(std::atan2(d1.y, d1.x) - std::atan2(d2.y, d2.x));
    t.pivot = p2a;
    t.translation = p1a - p2a;
    return t;
}

namespace detail {

inline std::size_t count_matched(const Grid2& target_index, const std::vector<Vec2>& source,
                                 const SimilarityTransform2D& t, double eps) {
    std::size_t n = 0;
    for (const auto& p : source)
        if (target_index.any_within(apply_transform(t, p), eps)) ++n;
    return n;
}

}  // namespace detail

// Counts, per target-side point set, whether the nearest transformed source
// point lies within match_epsilon; score = alpha*primary + beta*aux.
inline ScoredTransform score_transform(const SimilarityTransform2D& t,
                                       const std::vector<Vec2>& primary_target,
                                       const std::vector<Vec2>& primary_source,
                                       const std::vector<Vec2>& aux_target,
                                       const std::vector<Vec2>& aux_source,
                                       const RigidParams& params) {
    ScoredTransform st;
    st.transform = t;
    // "nearest counterpart within eps" == "some counterpart within eps"
    std::vector<Vec2> tp(primary_source.size());
    for (std::size_t i = 0; i < primary_source.size(); ++i) tp[i] = apply_transform(t, primary_source[i]);
    const Grid2 pidx(tp, std::max(params.match_epsilon, 1e-9));
    for (const auto& q : primary_target)
        if (pidx.any_within(q, params.match_epsilon)) ++st.matched_primary;

    if (!aux_source.empty() && !aux_target.empty()) {
        std::vector<Vec2> ta(aux_source.size());
        for (std::size_t i = 0; i < aux_source.size(); ++i) ta[i] = apply_transform(t, aux_source[i]);
        const Grid2 aidx(ta, std::max(params.match_epsilon, 1e-9));
        for (const auto& q : aux_target)
            if (aidx.any_within(q, params.match_epsilon)) ++st.matched_aux;
    }
    st.score = params.weight_primary * static_cast<double>(st.matched_primary) +
               params.weight_aux * static_cast<double>(st.matched_aux);
    return st;
}

namespace detail {

struct PairSeg {
    std::size_t i, j;
    double len;
    double angle;
};

inline std::vector<PairSeg> ordered_pairs(const std::vector<Vec2>& pts) {
    std::vector<PairSeg> out;
    out.reserve(pts.size() * (pts.size() - 1));
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (i == j) continue;
            const Vec2 d = pts[j] - pts[i];
            const double len = d.norm();
            if (len <= 0.0) continue;
            out.push_back({i, j, len, std::atan2(d.y, d.x)});
        }
    return out;
}

// Canonicalize about the origin: apply(p) = s*R*p + b.
inline SimilarityTransform2D canonical(const SimilarityTransform2D& t) {
    SimilarityTransform2D c;
    c.scale = t.scale;
    c.rotation_rad = t.rotation_rad;
    c.pivot = {0.0, 0.0};
    c.translation = apply_transform(t, {0.0, 0.0});
    return c;
}

struct CandidateRef {
    std::size_t map_pair;
    std::size_t cloud_pair;
    double log_scale;
};

inline bool better(const ScoredTransform& a, const std::array<std::size_t, 4>& ia,
                   const ScoredTransform& b, const std::array<std::size_t, 4>& ib) {
    if (a.score != b.score) return a.score > b.score;
    const double la = std::abs(std::log(a.transform.scale));
    const double lb = std::abs(std::log(b.transform.scale));
    if (la != lb) return la < lb;
    const double ra = std::abs(a.transform.rotation_rad);
    const double rb = std::abs(b.transform.rotation_rad);
    if (ra != rb) return ra < rb;
    const double ta = a.transform.translation.norm();
    const double tb = b.transform.translation.norm();
    if (ta != tb) return ta < tb;
    return ia < ib;
}

}  // namespace detail

// Exhaustive-within-budget search over candidate transforms generated from
// ordered intersection pairs on both sides (corners + extreme control points
// when intersections are scarce). Returns the argmax of score_transform with
// intersections primary and control points auxiliary.
namespace detail {

// Closed-form least-squares similarity (scale, rotation, translation) mapping
// sources onto targets. Returns false when the sources are degenerate.
inline bool fit_similarity(const std::vector<Vec2>& src, const std::vector<Vec2>& dst,
                           SimilarityTransform2D& out) {
    if (src.size() < 2 || src.size() != dst.size()) return false;
    const double n = static_cast<double>(src.size());
    Vec2 ms{0, 0}, md{0, 0};
    for (std::size_t i = 0; i < src.size(); ++i) {
        ms = ms + src[i];
        md = md + dst[i];
    }
    ms = ms * (1.0 / n);
    md = md * (1.0 / n);
    double a = 0.0, b = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < src.size(); ++i) {
        const Vec2 s = src[i] - ms, d = dst[i] - md;
        a += s.dot(d);
        b += s.cross(d);
        ss += s.squared_norm();
    }
    if (ss < 1e-12 || (a == 0.0 && b == 0.0)) return false;
    out.rotation_rad = std::atan2(b, a);
    out.scale = std::sqrt(a * a + b * b) / ss;
    out.pivot = ms;
    out.translation = md - ms;
    return true;
}

}  // namespace detail

inline ScoredTransform search_rigid(const KeypointSet& kp_cloud, const KeypointSet& kp_map,
                                    const RigidParams& params) {
    std::vector<Vec2> map_primary = kp_map.intersections;
    std::vector<Vec2> cloud_primary = kp_cloud.intersections;
    bool fallback = false;

    auto fallback_sources = [](const KeypointSet& kp) {
        std::vector<Vec2> src = kp.corners;
        // Two most-distant control points give a long, stable baseline.
        double best = -1.0;
        Vec2 a{}, b{};
        for (std::size_t i = 0; i < kp.control_points.size(); ++i)
            for (std::size_t j = i + 1; j < kp.control_points.size(); ++j) {
                const double d = (kp.control_points[i] - kp.control_points[j]).squared_norm();
                if (d > best) {
                    best = d;
                    a = kp.control_points[i];
                    b = kp.control_points[j];
                }
            }
        if (best > 0.0) {
            src.push_back(a);
            src.push_back(b);
        }
        return src;
    };

    if (map_primary.size() < 2 || cloud_primary.size() < 2) {
        if (kp_map.intersections.empty() && kp_cloud.intersections.empty() &&
            kp_map.control_points.empty() && kp_cloud.control_points.empty())
            throw InsufficientKeypoints("no keypoints on either side");
        map_primary = fallback_sources(kp_map);
        cloud_primary = fallback_sources(kp_cloud);
        fallback = true;
        if (map_primary.size() < 2 || cloud_primary.size() < 2)
            throw InsufficientKeypoints("need at least 2 pair-source keypoints per side");
    }

    const auto map_pairs = detail::ordered_pairs(map_primary);
    const auto cloud_pairs = detail::ordered_pairs(cloud_primary);
    if (map_pairs.empty() || cloud_pairs.empty())
        throw InsufficientKeypoints("keypoints are coincident");

    std::vector<detail::CandidateRef> cands;
    for (std::size_t m = 0; m < map_pairs.size(); ++m)
        for (std::size_t c = 0; c < cloud_pairs.size(); ++c) {
            const double s = map_pairs[m].len / cloud_pairs[c].len;
            if (s < params.scale_min || s > params.scale_max) continue;
            cands.push_back({m, c, std::log(s)});
        }
    if (cands.empty()) throw NoViableCandidate("all pair-length ratios violate scale bounds");

    // Budget: keep the candidates whose log-scale sits closest to the median
    // log-scale (the dominant ratio bin).
    if (cands.size() > params.max_candidates) {
        std::vector<double> ls(cands.size());
        for (std::size_t i = 0; i < cands.size(); ++i) ls[i] = cands[i].log_scale;
        std::nth_element(ls.begin(), ls.begin() + static_cast<std::ptrdiff_t>(ls.size() / 2), ls.end());
        const double med = ls[ls.size() / 2];
        std::stable_sort(cands.begin(), cands.end(),
                         [med](const detail::CandidateRef& a, const detail::CandidateRef& b) {
                             return std::abs(a.log_scale - med) < std::abs(b.log_scale - med);
                         });
        cands.resize(params.max_candidates);
    }

    ScoredTransform best;
    best.score = -1.0;
    std::array<std::size_t, 4> best_idx{~0ul, ~0ul, ~0ul, ~0ul};

    const double eps = std::max(params.match_epsilon, 1e-9);
    std::vector<Vec2> xformed;

    for (const auto& cand : cands) {
        const auto& mp = map_pairs[cand.map_pair];
        const auto& cp = cloud_pairs[cand.cloud_pair];
        SimilarityTransform2D t;
        t.scale = mp.len / cp.len;
        t.rotation_rad = normalize_angle(mp.angle - cp.angle);
        t.pivot = cloud_primary[cp.i];
        t.translation = map_primary[mp.i] - cloud_primary[cp.i];

        // Per map keypoint: does some transformed cloud keypoint land within
        // eps of it? (same counting rule as score_transform)
        xformed.resize(cloud_primary.size());
        for (std::size_t i = 0; i < cloud_primary.size(); ++i)
            xformed[i] = apply_transform(t, cloud_primary[i]);
        const Grid2 pidx(xformed, eps);
        std::size_t mp_count = 0;
        for (const auto& q : map_primary)
            if (pidx.any_within(q, params.match_epsilon)) ++mp_count;

        ScoredTransform st;
        st.transform = detail::canonical(t);
        st.matched_primary = mp_count;

        // Upper bound on the aux contribution before paying for it.
        const double upper = params.weight_primary * static_cast<double>(mp_count) +
                             params.weight_aux * static_cast<double>(kp_map.control_points.size());
        const std::array<std::size_t, 4> idx{cand.map_pair, cand.cloud_pair, 0, 0};
        if (best.score >= 0.0 && upper < best.score) continue;

        std::size_t aux_count = 0;
        if (!kp_cloud.control_points.empty() && !kp_map.control_points.empty()) {
            xformed.resize(kp_cloud.control_points.size());
            for (std::size_t i = 0; i < kp_cloud.control_points.size(); ++i)
                xformed[i] = apply_transform(t, kp_cloud.control_points[i]);
            const Grid2 aidx(xformed, eps);
            for (const auto& q : kp_map.control_points)
                if (aidx.any_within(q, params.match_epsilon)) ++aux_count;
        }
        st.matched_aux = aux_count;
        st.score = params.weight_primary * static_cast<double>(mp_count) +
                   params.weight_aux * static_cast<double>(aux_count);
        if (best.score < 0.0 || detail::better(st, idx, best, best_idx)) {
            best = st;
            best_idx = idx;
        }
    }

    if (best.score < 0.0) throw NoViableCandidate("no candidate could be scored");

    // Least-squares refinement: the winning one-pair candidate is only as
    // good as its baseline, so refit over every correspondence it induces and
    // keep the result when the score does not drop. A couple of rounds lets
    // matches claimed by the refined transform feed the next fit.
    auto correspondences = [&](const SimilarityTransform2D& t, const std::vector<Vec2>& src_pts,
                               const std::vector<Vec2>& dst_pts, std::vector<Vec2>& src,
                               std::vector<Vec2>& dst) {
        for (const auto& p : src_pts) {
            const Vec2 q = apply_transform(t, p);
            double bd = params.match_epsilon * params.match_epsilon;
            const Vec2* hit = nullptr;
            for (const auto& m : dst_pts) {
                const double d = (q - m).squared_norm();
                if (d <= bd) {
                    bd = d;
                    hit = &m;
                }
            }
            if (hit) {
                src.push_back(p);
                dst.push_back(*hit);
            }
        }
    };
    for (int round = 0; round < 3; ++round) {
        std::vector<Vec2> src, dst;
        correspondences(best.transform, cloud_primary, map_primary, src, dst);
        correspondences(best.transform, kp_cloud.control_points, kp_map.control_points, src, dst);
        SimilarityTransform2D refined;
        if (!detail::fit_similarity(src, dst, refined)) break;
        if (refined.scale < params.scale_min || refined.scale > params.scale_max) break;
        const auto rescored = score_transform(refined, map_primary, cloud_primary,
                                              kp_map.control_points, kp_cloud.control_points, params);
        if (rescored.score < best.score) break;
        const bool same = rescored.score == best.score &&
                          rescored.transform.scale == best.transform.scale &&
                          rescored.transform.rotation_rad == best.transform.rotation_rad &&
                          rescored.transform.translation.x == best.transform.translation.x &&
                          rescored.transform.translation.y == best.transform.translation.y;
        best = rescored;
        if (same) break;
    }

    best.low_confidence = fallback;
    return best;
}

// Centering-and-rescaling application to a whole cloud:
//   p' = R(s (p - c)) + c - t,   c = cloud XY centroid.
// z is untouched.
inline PointCloud apply_global(const PointCloud& cloud, const SimilarityTransform2D& t) {
    if (cloud.empty()) throw EmptyCloud();
    Vec2 c{0, 0};
    for (const auto& p : cloud.points) c = c + p.xy();
    c = c * (1.0 / static_cast<double>(cloud.size()));
    PointCloud out = cloud;
    for (auto& p : out.points) {
        const Vec2 q = rotate((p.xy() - c) * t.scale, t.rotation_rad) + c - t.translation;
        p.x = q.x;
        p.y = q.y;
    }
    return out;
}

// Re-expresses an arbitrary similarity W about a cloud's centroid so that
// apply_global(cloud, result) applies W exactly: t* = c - W(c).
inline SimilarityTransform2D to_centered_form(const SimilarityTransform2D& w, const PointCloud& cloud) {
    if (cloud.empty()) throw EmptyCloud();
    Vec2 c{0, 0};
    for (const auto& p : cloud.points) c = c + p.xy();
    c = c * (1.0 / static_cast<double>(cloud.size()));
    SimilarityTransform2D out;
    out.scale = w.scale;
    out.rotation_rad = w.rotation_rad;
    out.pivot = c;
    out.translation = c - apply_transform(w, c);
    return out;
}

}  // namespace georeg
