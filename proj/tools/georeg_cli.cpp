// georeg command-line frontend. One subcommand per pipeline stage plus
// `run` (everything) and `synth` (test-scene generation).
//
// Exit codes: 0 success, 2 config error, 3 stage failure, 4 I/O error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "georeg/georeg.hpp"

namespace fs = std::filesystem;
using namespace georeg;

namespace {

struct ConfigFlags {
    std::optional<std::string> config_path;
    std::optional<std::string> cloud, map, terrain, output;
    std::optional<double> map_mpp, raster_mpp, match_epsilon, tau_match, rbf_epsilon;
    std::optional<double> control_spacing, min_branch_len, delta, cell_size, tile_size;
    std::optional<int> road_label, min_pts, k_neighbors;
    std::optional<bool> resume, debug_rasters;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& f) {
    cmd->add_option("-c,--config", f.config_path, "JSON config file");
    cmd->add_option("--cloud", f.cloud, "input point cloud (.ply)");
    cmd->add_option("--map", f.map, "map image (.ppm/.png, optional .wld sidecar)");
    cmd->add_option("--terrain", f.terrain, "terrain grid (Esri ASCII)");
    cmd->add_option("-o,--output", f.output, "output directory");
    cmd->add_option("--map-mpp", f.map_mpp, "map metres/pixel when no world file");
    cmd->add_option("--raster-mpp", f.raster_mpp, "cloud rasterization metres/pixel");
    cmd->add_option("--road-label", f.road_label, "label value marking road points");
    cmd->add_option("--match-epsilon", f.match_epsilon, "rigid match radius (pixels)");
    cmd->add_option("--tau-match", f.tau_match, "warp correspondence threshold (pixels)");
    cmd->add_option("--rbf-epsilon", f.rbf_epsilon, "RBF kernel parameter");
    cmd->add_option("--control-spacing", f.control_spacing, "control point spacing (pixels)");
    cmd->add_option("--min-branch-len", f.min_branch_len, "branch pruning length (pixels)");
    cmd->add_option("--delta", f.delta, "intersection match radius (metres)");
    cmd->add_option("--min-pts", f.min_pts, "DBSCAN minimum cluster size");
    cmd->add_option("--k-neighbors", f.k_neighbors, "kNN neighborhood size");
    cmd->add_option("--cell-size", f.cell_size, "ground grid cell size (metres)");
    cmd->add_option("--tile-size", f.tile_size, "ground RANSAC tile size (metres)");
    cmd->add_flag("--resume", [&f](std::int64_t) { f.resume = true; }, "reuse existing stage artifacts");
    cmd->add_flag("--debug-rasters", [&f](std::int64_t) { f.debug_rasters = true; },
                  "dump intermediate PGM rasters");
}

// flag > file > default
PipelineConfig resolve_config(const ConfigFlags& f) {
    PipelineConfig c = f.config_path ? load_config(*f.config_path) : PipelineConfig{};
    if (f.cloud) c.cloud_path = *f.cloud;
    if (f.map) c.map_path = *f.map;
    if (f.terrain) c.terrain_path = *f.terrain;
    if (f.output) c.output_dir = *f.output;
    if (f.map_mpp) c.map_mpp = *f.map_mpp;
    if (f.raster_mpp) c.prep.raster_mpp = *f.raster_mpp;
    if (f.road_label) c.road_label = *f.road_label;
    if (f.match_epsilon) c.rigid.match_epsilon = *f.match_epsilon;
    if (f.tau_match) c.warp.tau_match = *f.tau_match;
    if (f.rbf_epsilon) c.warp.epsilon = *f.rbf_epsilon;
    if (f.control_spacing) c.skeleton.control_point_spacing = *f.control_spacing;
    if (f.min_branch_len) c.skeleton.min_branch_len = *f.min_branch_len;
    if (f.delta) c.intersection_delta = *f.delta;
    if (f.min_pts) c.prep.min_pts = *f.min_pts;
    if (f.k_neighbors) c.prep.k_neighbors = *f.k_neighbors;
    if (f.cell_size) c.elev.cell_size = *f.cell_size;
    if (f.tile_size) c.elev.tile_size = *f.tile_size;
    if (f.resume) c.resume = *f.resume;
    if (f.debug_rasters) c.debug_rasters = *f.debug_rasters;
    return c;
}

std::string art(const PipelineConfig& c, const char* name) {
    fs::create_directories(c.output_dir);
    return (fs::path(c.output_dir) / name).string();
}

json keypoints_json(const KeypointSet& kp) {
    auto pts = [](const std::vector<Vec2>& v) {
        json a = json::array();
        for (const auto& p : v) a.push_back({p.x, p.y});
        return a;
    };
    return {{"intersections", pts(kp.intersections)},
            {"control_points", pts(kp.control_points)},
            {"corners", pts(kp.corners)}};
}

KeypointSet keypoints_from_json(const json& j) {
    auto pts = [](const json& a) {
        std::vector<Vec2> v;
        for (const auto& p : a) v.push_back({p[0].get<double>(), p[1].get<double>()});
        return v;
    };
    KeypointSet kp;
    kp.intersections = pts(j.at("intersections"));
    kp.control_points = pts(j.at("control_points"));
    kp.corners = pts(j.at("corners"));
    return kp;
}

json geo_json(const GeoTransform& g) {
    return {{"origin_x", g.origin_x}, {"origin_y", g.origin_y}, {"mpp", g.meters_per_pixel}};
}

GeoTransform geo_from_json(const json& j) {
    GeoTransform g;
    g.origin_x = j.at("origin_x").get<double>();
    g.origin_y = j.at("origin_y").get<double>();
    g.meters_per_pixel = j.at("mpp").get<double>();
    return g;
}

int cmd_prep(const PipelineConfig& cfg) {
    if (cfg.cloud_path.empty()) throw ConfigError("--cloud is required");
    const PointCloud raw = read_point_cloud(cfg.cloud_path);
    const PointCloud out = detail::stage("prep", [&] { return stage_prep(raw, cfg.prep, cfg.road_label); });
    write_point_cloud(out, art(cfg, "01_prep.ply"));
    std::cout << "prep: " << raw.size() << " -> " << out.size() << " points\n";
    return 0;
}

int cmd_skel_cloud(const PipelineConfig& cfg) {
    const std::string in = cfg.cloud_path.empty() ? art(cfg, "01_prep.ply") : cfg.cloud_path;
    const PointCloud cloud = read_point_cloud(in);
    const SkeletonResult r =
        detail::stage("skel-cloud", [&] { return stage_skel_cloud(cloud, cfg.prep, cfg.skeleton); });
    write_pgm(r.raster, art(cfg, "02_skel_cloud.pgm"));
    detail::write_json({{"keypoints", keypoints_json(r.keypoints)}, {"geo", geo_json(r.graph.geo)}},
                       art(cfg, "02_skel_cloud.json"));
    std::cout << "skel-cloud: " << r.graph.nodes.size() << " nodes, " << r.graph.edges.size()
              << " edges, " << r.keypoints.intersections.size() << " intersections\n";
    return 0;
}

int cmd_skel_map(const PipelineConfig& cfg) {
    if (cfg.map_path.empty()) throw ConfigError("--map is required");
    const ColorRaster map = read_color_raster(cfg.map_path, cfg.map_mpp);
    const SkeletonResult r =
        detail::stage("skel-map", [&] { return stage_skel_map(map, cfg.hsv, cfg.skeleton); });
    write_pgm(r.raster, art(cfg, "03_skel_map.pgm"));
    detail::write_json({{"keypoints", keypoints_json(r.keypoints)}, {"geo", geo_json(r.graph.geo)}},
                       art(cfg, "03_skel_map.json"));
    std::cout << "skel-map: " << r.graph.nodes.size() << " nodes, " << r.graph.edges.size()
              << " edges, " << r.keypoints.intersections.size() << " intersections\n";
    return 0;
}

int cmd_align(const PipelineConfig& cfg) {
    const json jc = detail::read_json(art(cfg, "02_skel_cloud.json"));
    const json jm = detail::read_json(art(cfg, "03_skel_map.json"));
    const KeypointSet kp_cloud = keypoints_from_json(jc.at("keypoints"));
    const KeypointSet kp_map = keypoints_from_json(jm.at("keypoints"));
    const GeoTransform map_geo = geo_from_json(jm.at("geo"));
    const RigidResult r =
        detail::stage("align", [&] { return stage_align(kp_cloud, kp_map, map_geo, cfg.rigid); });
    detail::write_json({{"pixel_transform", detail::transform_to_json(r.pixel.transform)},
                        {"world_transform", detail::transform_to_json(r.world)},
                        {"score", r.pixel.score},
                        {"matched_primary", r.pixel.matched_primary},
                        {"matched_aux", r.pixel.matched_aux},
                        {"low_confidence", r.pixel.low_confidence}},
                       art(cfg, "04_rigid.json"));
    std::cout << "align: score " << r.pixel.score << ", scale " << r.world.scale << ", theta "
              << r.world.rotation_rad << (r.pixel.low_confidence ? " (low confidence)" : "") << "\n";
    return 0;
}

int cmd_warp(const PipelineConfig& cfg) {
    const json jc = detail::read_json(art(cfg, "02_skel_cloud.json"));
    const json jm = detail::read_json(art(cfg, "03_skel_map.json"));
    const json jr = detail::read_json(art(cfg, "04_rigid.json"));
    const KeypointSet kp_cloud = keypoints_from_json(jc.at("keypoints"));
    const KeypointSet kp_map = keypoints_from_json(jm.at("keypoints"));
    const GeoTransform map_geo = geo_from_json(jm.at("geo"));
    const SimilarityTransform2D world = detail::transform_from_json(jr.at("world_transform"));

    const PointCloud prepped = read_point_cloud(art(cfg, "01_prep.ply"));
    detail::stage("warp", [&] {
        const PointCloud rigid_cloud = apply_global(prepped, to_centered_form(world, prepped));
        KeypointSet kp;
        for (const auto& p : kp_cloud.intersections) kp.intersections.push_back(apply_transform(world, p));
        for (const auto& p : kp_cloud.control_points)
            kp.control_points.push_back(apply_transform(world, p));
        const RbfWarp w = stage_fit_warp(kp, kp_map, map_geo, cfg.warp);
        const PointCloud warped = apply_warp_world(rigid_cloud, w, map_geo);
        detail::write_json(detail::warp_to_json(w), art(cfg, "05_warp.json"));
        write_point_cloud(warped, art(cfg, "06_warped.ply"));
        std::cout << "warp: " << w.centers.size() << " centers\n";
        return 0;
    });
    return 0;
}

int cmd_elevate(const PipelineConfig& cfg) {
    if (cfg.terrain_path.empty()) throw ConfigError("--terrain is required");
    const std::string in = cfg.cloud_path.empty() ? art(cfg, "06_warped.ply") : cfg.cloud_path;
    const PointCloud cloud = read_point_cloud(in);
    detail::stage("elevate", [&] {
        if (!fs::exists(cfg.terrain_path))
            throw IoError("terrain file does not exist: " + cfg.terrain_path);
        const ElevationGrid terrain = read_esri_ascii(cfg.terrain_path);
        const ElevationResult r = stage_elevate(cloud, terrain, cfg.elev);
        write_point_cloud(r.cloud, art(cfg, "07_elevated.ply"));
        std::cout << "elevate: corr " << r.corr_before << " -> " << r.corr_after << ", sigma "
                  << r.sigma_before << " -> " << r.sigma_after << "\n";
        return 0;
    });
    return 0;
}

int cmd_evaluate(const PipelineConfig& cfg) {
    const std::string in = cfg.cloud_path.empty()
                               ? (fs::exists(art(cfg, "07_elevated.ply")) ? art(cfg, "07_elevated.ply")
                                                                          : art(cfg, "06_warped.ply"))
                               : cfg.cloud_path;
    if (cfg.map_path.empty()) throw ConfigError("--map is required");
    const PointCloud cloud = read_point_cloud(in);
    const ColorRaster map = read_color_raster(cfg.map_path, cfg.map_mpp);
    detail::stage("evaluate", [&] {
        const SkeletonResult map_skel = stage_skel_map(map, cfg.hsv, cfg.skeleton);
        const EvaluateResult r =
            stage_evaluate(cloud, cfg.prep, cfg.skeleton, map_skel, cfg.intersection_delta);
        AlignmentReport rep;
        rep.centerline_mu = r.stats.mu_hat;
        rep.centerline_sigma = r.stats.sigma_hat;
        rep.outlier_threshold = r.stats.tau_outlier;
        rep.raw_distances = r.stats.distances;
        for (double d : r.stats.distances)
            if (d > r.stats.tau_outlier) ++rep.outlier_count;
        rep.intersection_offset_mean = r.e_int;
        rep.matched_intersections = r.matched;
        detail::write_json(report_to_json(rep), art(cfg, "08_report.json"));
        std::ofstream csv(art(cfg, "09_distances.csv"));
        csv.precision(12);
        for (double d : r.stats.distances) csv << d << "\n";
        std::cout << "evaluate: sigma " << r.stats.sigma_hat << " m, E_int " << r.e_int << " m ("
                  << r.matched << " matched)\n";
        return 0;
    });
    return 0;
}

int cmd_run(const PipelineConfig& cfg) {
    const AlignmentReport rep = run_pipeline(cfg);
    std::cout << "run: sigma " << rep.centerline_sigma << " m (rigid " << rep.centerline_sigma_rigid
              << " m), E_int " << rep.intersection_offset_mean << " m (" << rep.matched_intersections
              << " matched)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geo-registration of terrestrial point clouds to 2D road maps"};
    app.require_subcommand(1);

    ConfigFlags flags;
    std::string synth_spec_path, synth_out = "scene";
    uint64_t synth_seed = 1;

    auto* prep = app.add_subcommand("prep", "road selection, downsample, outlier + cluster filters");
    auto* skc = app.add_subcommand("skel-cloud", "rasterize + skeletonize the prepped cloud");
    auto* skm = app.add_subcommand("skel-map", "segment + skeletonize the map image");
    auto* align = app.add_subcommand("align", "rigid similarity search over keypoints");
    auto* warp = app.add_subcommand("warp", "non-rigid RBF correction");
    auto* elevate = app.add_subcommand("elevate", "ground extraction + terrain matching");
    auto* evaluate = app.add_subcommand("evaluate", "centerline / intersection / elevation metrics");
    auto* run = app.add_subcommand("run", "full pipeline");
    for (auto* cmd : {prep, skc, skm, align, warp, elevate, evaluate, run}) add_config_flags(cmd, flags);

    auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
    synth->add_option("--spec", synth_spec_path, "scene spec JSON");
    synth->add_option("--seed", synth_seed, "scene seed (overrides spec)");
    synth->add_option("-o,--output", synth_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            SceneSpec spec;
            if (!synth_spec_path.empty()) spec = scene_spec_from_json(detail::read_json(synth_spec_path));
            if (synth->count("--seed")) spec.seed = synth_seed;
            const Scene scene = generate_scene(spec);
            write_scene(scene, spec, synth_out);
            std::cout << "synth: " << scene.cloud.size() << " points, "
                      << scene.truth.map_intersections.size() << " intersections -> " << synth_out
                      << "\n";
            return 0;
        }
        const PipelineConfig cfg = resolve_config(flags);
        if (prep->parsed()) return cmd_prep(cfg);
        if (skc->parsed()) return cmd_skel_cloud(cfg);
        if (skm->parsed()) return cmd_skel_map(cfg);
        if (align->parsed()) return cmd_align(cfg);
        if (warp->parsed()) return cmd_warp(cfg);
        if (elevate->parsed()) return cmd_elevate(cfg);
        if (evaluate->parsed()) return cmd_evaluate(cfg);
        if (run->parsed()) return cmd_run(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidSpec& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const StageError& e) {
        std::cerr << "stage failure: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const ParseError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const UnsupportedFormat& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
