#pragma once

// Pipeline orchestration: configuration, stage sequencing, artifact
// persistence, and the JSON report.

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "georeg/cloud_prep.hpp"
#include "georeg/elevation.hpp"
#include "georeg/errors.hpp"
#include "georeg/io.hpp"
#include "georeg/metrics.hpp"
#include "georeg/model.hpp"
#include "georeg/nonrigid_warp.hpp"
#include "georeg/raster_skeleton.hpp"
#include "georeg/rigid_align.hpp"

namespace georeg {

using json = nlohmann::json;

struct PipelineConfig {
    std::string cloud_path;
    std::string map_path;
    std::string terrain_path;  // empty disables the elevation stage
    std::string output_dir = "out";

    double map_mpp = 1.0;  // used when the map has no world file
    int32_t road_label = 1;
    double intersection_delta = 15.0;  // metres, mutual-NN radius for E_int
    bool resume = false;
    bool debug_rasters = false;

    PrepParams prep;
    HsvThresholds hsv;
    SkeletonParams skeleton;
    RigidParams rigid;
    WarpParams warp;
    ElevParams elev;
};

namespace detail {

template <typename T>
inline void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline PipelineConfig config_from_json(const json& j) {
    PipelineConfig c;
    try {
        if (j.contains("paths")) {
            const auto& p = j.at("paths");
            detail::get_if(p, "cloud", c.cloud_path);
            detail::get_if(p, "map", c.map_path);
            detail::get_if(p, "terrain", c.terrain_path);
            detail::get_if(p, "output_dir", c.output_dir);
        }
        detail::get_if(j, "map_mpp", c.map_mpp);
        detail::get_if(j, "road_label", c.road_label);
        detail::get_if(j, "intersection_delta", c.intersection_delta);
        detail::get_if(j, "resume", c.resume);
        detail::get_if(j, "debug_rasters", c.debug_rasters);
        if (j.contains("prep")) {
            const auto& s = j.at("prep");
            detail::get_if(s, "alpha", c.prep.alpha);
            detail::get_if(s, "k_neighbors", c.prep.k_neighbors);
            detail::get_if(s, "beta_std", c.prep.beta_std);
            detail::get_if(s, "gamma_eps", c.prep.gamma_eps);
            detail::get_if(s, "min_pts", c.prep.min_pts);
            detail::get_if(s, "raster_mpp", c.prep.raster_mpp);
        }
        if (j.contains("hsv")) {
            const auto& s = j.at("hsv");
            detail::get_if(s, "h_min", c.hsv.h_min);
            detail::get_if(s, "h_max", c.hsv.h_max);
            detail::get_if(s, "s_max", c.hsv.s_max);
            detail::get_if(s, "v_min", c.hsv.v_min);
        }
        if (j.contains("skeleton")) {
            const auto& s = j.at("skeleton");
            detail::get_if(s, "min_branch_len", c.skeleton.min_branch_len);
            detail::get_if(s, "curvature_threshold", c.skeleton.curvature_threshold);
            detail::get_if(s, "component_beta", c.skeleton.component_beta);
            detail::get_if(s, "control_point_spacing", c.skeleton.control_point_spacing);
        }
        if (j.contains("rigid")) {
            const auto& s = j.at("rigid");
            detail::get_if(s, "match_epsilon", c.rigid.match_epsilon);
            detail::get_if(s, "weight_primary", c.rigid.weight_primary);
            detail::get_if(s, "weight_aux", c.rigid.weight_aux);
            detail::get_if(s, "scale_min", c.rigid.scale_min);
            detail::get_if(s, "scale_max", c.rigid.scale_max);
            detail::get_if(s, "max_candidates", c.rigid.max_candidates);
        }
        if (j.contains("warp")) {
            const auto& s = j.at("warp");
            detail::get_if(s, "epsilon", c.warp.epsilon);
            detail::get_if(s, "tau_match", c.warp.tau_match);
            detail::get_if(s, "include_affine", c.warp.include_affine);
        }
        if (j.contains("elev")) {
            const auto& s = j.at("elev");
            detail::get_if(s, "tau_h", c.elev.tau_h);
            detail::get_if(s, "tau_min", c.elev.tau_min);
            detail::get_if(s, "cell_size", c.elev.cell_size);
            detail::get_if(s, "ransac_iters", c.elev.ransac_iters);
            detail::get_if(s, "outlier_k", c.elev.outlier_k);
            detail::get_if(s, "tile_size", c.elev.tile_size);
            detail::get_if(s, "seed", c.elev.seed);
            detail::get_if(s, "min_inlier_ratio", c.elev.min_inlier_ratio);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    return c;
}

inline PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return config_from_json(j);
}

inline void validate_config(const PipelineConfig& c) {
    namespace fs = std::filesystem;
    if (c.cloud_path.empty() || c.map_path.empty())
        throw ConfigError("cloud and map paths are required");
    if (!fs::exists(c.cloud_path)) throw ConfigError("cloud path does not exist: " + c.cloud_path);
    if (!fs::exists(c.map_path)) throw ConfigError("map path does not exist: " + c.map_path);
    if (!(c.map_mpp > 0.0)) throw ConfigError("map_mpp must be positive");
    if (!(c.prep.raster_mpp > 0.0)) throw ConfigError("prep.raster_mpp must be positive");
    if (!(c.rigid.scale_min > 0.0) || c.rigid.scale_max < c.rigid.scale_min)
        throw ConfigError("rigid scale bounds must satisfy 0 < scale_min <= scale_max");
    // Note: terrain_path, if set, is validated at the elevation stage so that
    // XY artifacts still get written when the terrain file is missing.
}

// Map world frame expressed as a similarity over map pixel coordinates:
// world = geo_transform(pixel).
inline SimilarityTransform2D pixel_to_world_similarity(const GeoTransform& geo) {
    SimilarityTransform2D t;
    t.scale = geo.meters_per_pixel;
    t.rotation_rad = 0.0;
    t.pivot = {0.0, 0.0};
    t.translation = {geo.origin_x + 0.5 * geo.meters_per_pixel,
                     geo.origin_y + 0.5 * geo.meters_per_pixel};
    return t;
}

namespace detail {

inline json transform_to_json(const SimilarityTransform2D& t) {
    return {{"scale", t.scale},
            {"rotation_rad", t.rotation_rad},
            {"translation", {t.translation.x, t.translation.y}},
            {"pivot", {t.pivot.x, t.pivot.y}}};
}

inline SimilarityTransform2D transform_from_json(const json& j) {
    SimilarityTransform2D t;
    t.scale = j.at("scale").get<double>();
    t.rotation_rad = j.at("rotation_rad").get<double>();
    t.translation = {j.at("translation")[0].get<double>(), j.at("translation")[1].get<double>()};
    t.pivot = {j.at("pivot")[0].get<double>(), j.at("pivot")[1].get<double>()};
    return t;
}

inline json warp_to_json(const RbfWarp& w) {
    json centers = json::array(), wx = json::array(), wy = json::array();
    for (const auto& c : w.centers) centers.push_back({c.x, c.y});
    for (double v : w.weights_x) wx.push_back(v);
    for (double v : w.weights_y) wy.push_back(v);
    return {{"epsilon", w.epsilon},
            {"centers", centers},
            {"weights_x", wx},
            {"weights_y", wy},
            {"affine", {{w.affine[0][0], w.affine[0][1], w.affine[0][2]},
                        {w.affine[1][0], w.affine[1][1], w.affine[1][2]}}}};
}

inline RbfWarp warp_from_json(const json& j) {
    RbfWarp w;
    w.epsilon = j.at("epsilon").get<double>();
    for (const auto& c : j.at("centers")) w.centers.push_back({c[0].get<double>(), c[1].get<double>()});
    for (const auto& v : j.at("weights_x")) w.weights_x.push_back(v.get<double>());
    for (const auto& v : j.at("weights_y")) w.weights_y.push_back(v.get<double>());
    const auto& a = j.at("affine");
    for (int c = 0; c < 2; ++c)
        for (int k = 0; k < 3; ++k) w.affine[c][k] = a[c][k].get<double>();
    return w;
}

inline void write_json(const json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << "\n";
}

inline json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return j;
}

template <typename Fn>
inline auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const IoError&) {
        throw;  // keep the I/O error class so callers can map exit codes
    } catch (const ParseError&) {
        throw;
    } catch (const UnsupportedFormat&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(std::string(name) + ": " + e.what());
    }
}

}  // namespace detail

inline json report_to_json(const AlignmentReport& r) {
    double raw_mean = 0.0;
    for (double d : r.raw_distances) raw_mean += d;
    if (!r.raw_distances.empty()) raw_mean /= static_cast<double>(r.raw_distances.size());
    const double halfnormal_mean = r.centerline_sigma * std::sqrt(2.0 / kPi);
    return {{"centerline", {{"mu_hat", r.centerline_mu},
                            {"sigma_hat", r.centerline_sigma},
                            {"tau_outlier", r.outlier_threshold},
                            {"outlier_count", r.outlier_count},
                            {"raw_mean", raw_mean},
                            {"halfnormal_mean", halfnormal_mean},
                            {"sigma_hat_rigid", r.centerline_sigma_rigid},
                            {"mu_hat_rigid", r.centerline_mu_rigid}}},
            {"intersections", {{"offset_mean", r.intersection_offset_mean},
                               {"matched", r.matched_intersections}}},
            {"elevation", {{"sigma_before", r.elevation_sigma_before},
                           {"sigma_after", r.elevation_sigma_after},
                           {"corr_before", r.elevation_corr_before},
                           {"corr_after", r.elevation_corr_after}}}};
}

// --- individual stages, reusable by CLI subcommands ---

inline PointCloud stage_prep(const PointCloud& raw, const PrepParams& params, int32_t road_label) {
    PointCloud road = raw.labels ? select_road_points(raw, road_label) : raw;
    const double s = adaptive_voxel_size(road, params.alpha);
    PointCloud down = voxel_downsample(road, s);
    PointCloud inliers = remove_statistical_outliers(down, params);
    return filter_clusters_dbscan(inliers, params);
}

struct SkeletonResult {
    BinaryRaster raster;
    SkeletonGraph graph;
    KeypointSet keypoints;
};

inline SkeletonResult skeletonize_mask(const BinaryRaster& mask, const SkeletonParams& params) {
    SkeletonResult r;
    r.raster = thin(mask);
    r.graph = prune_branches(build_skeleton_graph(r.raster), params);
    r.raster = detail::graph_to_raster(r.graph);
    r.keypoints = extract_keypoints(r.graph, params);
    return r;
}

inline SkeletonResult stage_skel_cloud(const PointCloud& prepped, const PrepParams& prep,
                                       const SkeletonParams& params) {
    // occupancy rasters are speckled at realistic densities; the same
    // speck/hole filter used on the map mask turns the band solid
    BinaryRaster mask = rasterize_xy(prepped, prep.raster_mpp);
    mask = filter_components_bidirectional(mask, params.component_beta);
    return skeletonize_mask(mask, params);
}

inline SkeletonResult stage_skel_map(const ColorRaster& map, const HsvThresholds& hsv,
                                     const SkeletonParams& params) {
    BinaryRaster mask = segment_map_hsv(map, hsv);
    mask = filter_components_bidirectional(mask, params.component_beta);
    return skeletonize_mask(mask, params);
}

// Rigid search runs in map *pixel* coordinates so that match_epsilon keeps
// its pixel meaning; cloud keypoints stay in cloud metres (the similarity
// scale absorbs metres-per-pixel).
struct RigidResult {
    ScoredTransform pixel;              // cloud metres -> map pixels
    SimilarityTransform2D world;        // cloud metres -> map world metres
};

inline KeypointSet keypoints_to_pixels(const KeypointSet& kp, const GeoTransform& geo) {
    KeypointSet out;
    for (const auto& p : kp.intersections) out.intersections.push_back(geo.world_to_pixel(p));
    for (const auto& p : kp.control_points) out.control_points.push_back(geo.world_to_pixel(p));
    for (const auto& p : kp.corners) out.corners.push_back(geo.world_to_pixel(p));
    return out;
}

inline RigidResult stage_align(const KeypointSet& kp_cloud, const KeypointSet& kp_map_world,
                               const GeoTransform& map_geo, const RigidParams& params) {
    RigidResult r;
    r.pixel = search_rigid(kp_cloud, keypoints_to_pixels(kp_map_world, map_geo), params);
    r.world = compose(pixel_to_world_similarity(map_geo), r.pixel.transform);
    return r;
}

// Fits the RBF in map pixel space from rigidly-registered cloud keypoints
// (already in map world metres here) against the map keypoints.
inline RbfWarp stage_fit_warp(const KeypointSet& kp_cloud_world, const KeypointSet& kp_map_world,
                              const GeoTransform& map_geo, const WarpParams& params) {
    std::vector<Vec2> src, dst;
    auto push_pixels = [&](const std::vector<Vec2>& pts, std::vector<Vec2>& out) {
        for (const auto& p : pts) out.push_back(map_geo.world_to_pixel(p));
    };
    push_pixels(kp_cloud_world.intersections, src);
    push_pixels(kp_cloud_world.control_points, src);
    push_pixels(kp_map_world.intersections, dst);
    push_pixels(kp_map_world.control_points, dst);
    const auto pairs = match_control_points(src, dst, params.tau_match);
    return fit_rbf(pairs, params);
}

// Applies a pixel-space warp to a cloud whose XY is in map world metres.
inline PointCloud apply_warp_world(const PointCloud& cloud, const RbfWarp& w,
                                   const GeoTransform& map_geo) {
    if (cloud.empty()) throw EmptyCloud();
    PointCloud out = cloud;
    for (auto& p : out.points) {
        const Vec2 pix = map_geo.world_to_pixel(p.xy());
        const Vec2 d = evaluate_warp(w, pix);
        const Vec2 moved = map_geo.pixel_to_world(pix.x + d.x, pix.y + d.y);
        p.x = moved.x;
        p.y = moved.y;
    }
    return out;
}

struct ElevationResult {
    PointCloud cloud;
    GroundModel ground;
    double sigma_before = 0.0;
    double sigma_after = 0.0;
    double corr_before = 0.0;
    double corr_after = 0.0;
};

namespace detail {

// z-error dispersion and Pearson r of point z against sampled terrain,
// restricted to ground points with terrain data.
inline void elevation_stats(const PointCloud& cloud, const GroundModel& gm,
                            const ElevationGrid& terrain, double& sigma, double& corr) {
    std::vector<double> zs, ts;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (!gm.ground_index[i]) continue;
        const auto& p = cloud.points[i];
        const double t = terrain.sample_bilinear(p.x, p.y);
        if (t == ElevationGrid::no_data) continue;
        zs.push_back(p.z);
        ts.push_back(t);
    }
    sigma = 0.0;
    corr = 0.0;
    if (zs.size() < 2) return;
    double sum2 = 0.0;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        const double d = zs[i] - ts[i];
        sum2 += d * d;
    }
    sigma = std::sqrt(sum2 / static_cast<double>(zs.size()));
    try {
        corr = elevation_correlation(zs, ts);
    } catch (const ZeroVariance&) {
        corr = 0.0;  // flat terrain or flat cloud: correlation undefined
    }
}

}  // namespace detail

inline ElevationResult stage_elevate(const PointCloud& cloud, const ElevationGrid& terrain,
                                     const ElevParams& params) {
    ElevationResult r;
    r.ground = extract_ground_ransac(cloud, params);
    detail::elevation_stats(cloud, r.ground, terrain, r.sigma_before, r.corr_before);
    PointCloud matched = match_terrain(cloud, r.ground, terrain, nullptr, params.nearest_fallback);
    r.cloud = suppress_vertical_outliers(matched, r.ground, params);
    // Ground flags for the suppressed cloud (suppression only drops points).
    detail::elevation_stats(matched, r.ground, terrain, r.sigma_after, r.corr_after);
    return r;
}

// Trajectory points for centerline evaluation: the registered cloud's
// skeleton pixels projected to world metres.
inline std::vector<Vec2> trajectory_from_skeleton(const SkeletonGraph& g) {
    std::vector<Vec2> traj;
    for (const auto& e : g.edges)
        for (const auto& p : e.path) traj.push_back(g.geo.pixel_to_world(p.x, p.y));
    for (const auto& n : g.nodes)
        for (const auto& p : n.pixels) traj.push_back(g.geo.pixel_to_world(p.x, p.y));
    return traj;
}

struct EvaluateResult {
    DistanceStats stats;
    double e_int = 0.0;
    std::size_t matched = 0;
};

inline EvaluateResult stage_evaluate(const PointCloud& registered, const PrepParams& prep,
                                     const SkeletonParams& skel_params,
                                     const SkeletonResult& map_skel, double delta) {
    EvaluateResult r;
    const SkeletonResult cloud_skel = stage_skel_cloud(registered, prep, skel_params);
    const CenterlineSet centerlines = centerlines_from_graph(map_skel.graph);
    if (centerlines.segments.empty()) throw EmptyInput("map skeleton produced no centerlines");
    const auto traj = trajectory_from_skeleton(cloud_skel.graph);
    if (traj.empty()) throw EmptyInput("registered cloud produced no skeleton");
    r.stats = fit_mirrored_normal(centerline_distances(traj, centerlines));
    try {
        const auto [e, m] = intersection_offset(cloud_skel.keypoints.intersections,
                                                map_skel.keypoints.intersections, delta);
        r.e_int = e;
        r.matched = m;
    } catch (const Error&) {
        r.e_int = 0.0;  // no intersections in range; reported as matched = 0
        r.matched = 0;
    }
    return r;
}

inline AlignmentReport run_pipeline(const PipelineConfig& cfg) {
    namespace fs = std::filesystem;
    validate_config(cfg);
    fs::create_directories(cfg.output_dir);
    const auto art = [&](const char* name) { return (fs::path(cfg.output_dir) / name).string(); };

    // prep
    PointCloud prepped;
    if (cfg.resume && fs::exists(art("01_prep.ply"))) {
        prepped = read_point_cloud(art("01_prep.ply"));
    } else {
        prepped = detail::stage("prep", [&] {
            const PointCloud raw = read_point_cloud(cfg.cloud_path);
            PointCloud out = stage_prep(raw, cfg.prep, cfg.road_label);
            write_point_cloud(out, art("01_prep.ply"));
            return out;
        });
    }

    // cloud skeleton
    const SkeletonResult cloud_skel = detail::stage("skel-cloud", [&] {
        SkeletonResult r = stage_skel_cloud(prepped, cfg.prep, cfg.skeleton);
        if (cfg.debug_rasters) write_pgm(r.raster, art("02_skel_cloud.pgm"));
        return r;
    });

    // map skeleton
    const SkeletonResult map_skel = detail::stage("skel-map", [&] {
        const ColorRaster map = read_color_raster(cfg.map_path, cfg.map_mpp);
        SkeletonResult r = stage_skel_map(map, cfg.hsv, cfg.skeleton);
        if (cfg.debug_rasters) write_pgm(r.raster, art("03_skel_map.pgm"));
        return r;
    });
    const GeoTransform map_geo = map_skel.graph.geo;

    // rigid alignment
    RigidResult rigid;
    if (cfg.resume && fs::exists(art("04_rigid.json"))) {
        const json j = detail::read_json(art("04_rigid.json"));
        rigid.pixel.transform = detail::transform_from_json(j.at("pixel_transform"));
        rigid.pixel.score = j.value("score", 0.0);
        rigid.pixel.low_confidence = j.value("low_confidence", false);
        rigid.world = detail::transform_from_json(j.at("world_transform"));
    } else {
        rigid = detail::stage("align", [&] {
            RigidResult r = stage_align(cloud_skel.keypoints, map_skel.keypoints, map_geo, cfg.rigid);
            detail::write_json({{"pixel_transform", detail::transform_to_json(r.pixel.transform)},
                                {"world_transform", detail::transform_to_json(r.world)},
                                {"score", r.pixel.score},
                                {"matched_primary", r.pixel.matched_primary},
                                {"matched_aux", r.pixel.matched_aux},
                                {"low_confidence", r.pixel.low_confidence}},
                               art("04_rigid.json"));
            return r;
        });
    }
    const PointCloud rigid_cloud = detail::stage("align", [&] {
        return apply_global(prepped, to_centered_form(rigid.world, prepped));
    });

    // non-rigid warp
    RbfWarp warp;
    PointCloud warped;
    const auto rigid_kp_world = detail::stage("warp", [&] {
        KeypointSet kp;
        for (const auto& p : cloud_skel.keypoints.intersections)
            kp.intersections.push_back(apply_transform(rigid.world, p));
        for (const auto& p : cloud_skel.keypoints.control_points)
            kp.control_points.push_back(apply_transform(rigid.world, p));
        return kp;
    });
    if (cfg.resume && fs::exists(art("05_warp.json")) && fs::exists(art("06_warped.ply"))) {
        warp = detail::warp_from_json(detail::read_json(art("05_warp.json")));
        warped = read_point_cloud(art("06_warped.ply"));
    } else {
        detail::stage("warp", [&] {
            warp = stage_fit_warp(rigid_kp_world, map_skel.keypoints, map_geo, cfg.warp);
            warped = apply_warp_world(rigid_cloud, warp, map_geo);
            detail::write_json(detail::warp_to_json(warp), art("05_warp.json"));
            write_point_cloud(warped, art("06_warped.ply"));
            return 0;
        });
    }

    // metrics on the XY-registered cloud (written before elevation so a
    // missing terrain file still leaves XY results behind)
    AlignmentReport report;
    detail::stage("evaluate", [&] {
        const EvaluateResult rigid_eval =
            stage_evaluate(rigid_cloud, cfg.prep, cfg.skeleton, map_skel, cfg.intersection_delta);
        report.centerline_mu_rigid = rigid_eval.stats.mu_hat;
        report.centerline_sigma_rigid = rigid_eval.stats.sigma_hat;

        const EvaluateResult final_eval =
            stage_evaluate(warped, cfg.prep, cfg.skeleton, map_skel, cfg.intersection_delta);
        report.centerline_mu = final_eval.stats.mu_hat;
        report.centerline_sigma = final_eval.stats.sigma_hat;
        report.outlier_threshold = final_eval.stats.tau_outlier;
        report.raw_distances = final_eval.stats.distances;
        report.outlier_count = 0;
        for (double d : final_eval.stats.distances)
            if (d > final_eval.stats.tau_outlier) ++report.outlier_count;
        report.intersection_offset_mean = final_eval.e_int;
        report.matched_intersections = final_eval.matched;
        return 0;
    });
    detail::stage("evaluate", [&] {
        std::ofstream csv(art("09_distances.csv"));
        if (!csv) throw IoError("cannot write distances CSV");
        csv.precision(12);
        for (double d : report.raw_distances) csv << d << "\n";
        return 0;
    });

    // elevation
    PointCloud final_cloud = warped;
    if (!cfg.terrain_path.empty()) {
        detail::stage("elevate", [&] {
            if (!fs::exists(cfg.terrain_path))
                throw IoError("terrain file does not exist: " + cfg.terrain_path);
            const ElevationGrid terrain = read_esri_ascii(cfg.terrain_path);
            ElevationResult er = stage_elevate(warped, terrain, cfg.elev);
            final_cloud = std::move(er.cloud);
            report.elevation_sigma_before = er.sigma_before;
            report.elevation_sigma_after = er.sigma_after;
            report.elevation_corr_before = er.corr_before;
            report.elevation_corr_after = er.corr_after;
            write_point_cloud(final_cloud, art("07_elevated.ply"));
            return 0;
        });
    }

    detail::stage("report", [&] {
        detail::write_json(report_to_json(report), art("08_report.json"));
        return 0;
    });
    return report;
}

}  // namespace georeg
