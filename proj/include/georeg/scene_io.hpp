#pragma once

// Persists generated scenes in the standard pipeline formats plus a truth
// JSON, so `synth` output feeds straight into `run`.

#include <filesystem>

#include "georeg/io.hpp"
#include "georeg/pipeline.hpp"
#include "georeg/synth.hpp"

namespace georeg {

inline json scene_spec_to_json(const SceneSpec& s) {
    const char* kind = s.terrain.kind == TerrainKind::Flat   ? "flat"
                       : s.terrain.kind == TerrainKind::Ramp ? "ramp"
                                                             : "sine";
    return {{"seed", s.seed},
            {"blocks_x", s.blocks_x},
            {"blocks_y", s.blocks_y},
            {"block_size", s.block_size},
            {"road_width", s.road_width},
            {"point_density", s.point_density},
            {"noise_xy", s.noise_xy},
            {"gt_transform", detail::transform_to_json(s.gt_transform)},
            {"deform_amp", s.deform_amp},
            {"deform_wavelength", s.deform_wavelength},
            {"terrain", {{"kind", kind},
                         {"base", s.terrain.base},
                         {"slope", s.terrain.slope},
                         {"amplitude", s.terrain.amplitude},
                         {"wavelength", s.terrain.wavelength}}},
            {"z_bias", s.z_bias},
            {"map_mpp", s.map_mpp},
            {"margin", s.margin},
            {"single_road", s.single_road},
            {"building_fraction", s.building_fraction}};
}

inline SceneSpec scene_spec_from_json(const json& j) {
    SceneSpec s;
    detail::get_if(j, "seed", s.seed);
    detail::get_if(j, "blocks_x", s.blocks_x);
    detail::get_if(j, "blocks_y", s.blocks_y);
    detail::get_if(j, "block_size", s.block_size);
    detail::get_if(j, "road_width", s.road_width);
    detail::get_if(j, "point_density", s.point_density);
    detail::get_if(j, "noise_xy", s.noise_xy);
    if (j.contains("gt_transform")) s.gt_transform = detail::transform_from_json(j.at("gt_transform"));
    detail::get_if(j, "deform_amp", s.deform_amp);
    detail::get_if(j, "deform_wavelength", s.deform_wavelength);
    if (j.contains("terrain")) {
        const auto& t = j.at("terrain");
        std::string kind = "flat";
        detail::get_if(t, "kind", kind);
        if (kind == "flat") s.terrain.kind = TerrainKind::Flat;
        else if (kind == "ramp") s.terrain.kind = TerrainKind::Ramp;
        else if (kind == "sine") s.terrain.kind = TerrainKind::Sine;
        else throw ConfigError("unknown terrain kind: " + kind);
        detail::get_if(t, "base", s.terrain.base);
        detail::get_if(t, "slope", s.terrain.slope);
        detail::get_if(t, "amplitude", s.terrain.amplitude);
        detail::get_if(t, "wavelength", s.terrain.wavelength);
    }
    detail::get_if(j, "z_bias", s.z_bias);
    detail::get_if(j, "map_mpp", s.map_mpp);
    detail::get_if(j, "margin", s.margin);
    detail::get_if(j, "single_road", s.single_road);
    detail::get_if(j, "building_fraction", s.building_fraction);
    return s;
}

inline void write_scene(const Scene& scene, const SceneSpec& spec, const std::string& dir,
                        double terrain_cell = 10.0) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const auto at = [&](const char* name) { return (fs::path(dir) / name).string(); };
    write_ppm(scene.map, at("map.ppm"));
    write_world_file(scene.map.geo, at("map.ppm"));
    write_point_cloud(scene.cloud, at("cloud.ply"));
    write_esri_ascii(make_terrain_grid(spec, terrain_cell), at("terrain.asc"));

    json truth;
    truth["gt_transform"] = detail::transform_to_json(scene.truth.gt_transform);
    truth["z_bias"] = scene.truth.z_bias;
    truth["deform_amp"] = scene.truth.deform_amp;
    truth["deform_wavelength"] = scene.truth.deform_wavelength;
    auto pts = [](const std::vector<Vec2>& v) {
        json a = json::array();
        for (const auto& p : v) a.push_back({p.x, p.y});
        return a;
    };
    truth["map_intersections"] = pts(scene.truth.map_intersections);
    truth["cloud_intersections"] = pts(scene.truth.cloud_intersections);
    truth["map_control_points"] = pts(scene.truth.map_control_points);
    truth["cloud_control_points"] = pts(scene.truth.cloud_control_points);
    truth["spec"] = scene_spec_to_json(spec);
    detail::write_json(truth, at("truth.json"));
}

}  // namespace georeg
