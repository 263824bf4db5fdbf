#include <catch2/catch_amalgamated.hpp>

#include "georeg/io.hpp"

#include <filesystem>
#include <fstream>
#include <random>

using namespace georeg;
namespace fs = std::filesystem;

namespace {
fs::path tmpdir() {
    const auto d = fs::temp_directory_path() / "georeg_io_tests";
    fs::create_directories(d);
    return d;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}
}  // namespace

TEST_CASE("ascii PLY with three points") {
    const auto p = tmpdir() / "three.ply";
    write_file(p,
               "ply\nformat ascii 1.0\nelement vertex 3\n"
               "property float x\nproperty float y\nproperty float z\n"
               "end_header\n"
               "1 2 3\n4.5 5.5 6.5\n-1 -2 -3\n");
    const auto c = read_point_cloud(p.string());
    REQUIRE(c.size() == 3);
    CHECK(c.points[1].x == 4.5);
    CHECK(c.points[2].z == -3.0);
    CHECK_FALSE(c.labels.has_value());
}

TEST_CASE("ascii PLY with label and intensity properties") {
    const auto p = tmpdir() / "attrs.ply";
    write_file(p,
               "ply\nformat ascii 1.0\ncomment something\nelement vertex 2\n"
               "property double x\nproperty double y\nproperty double z\n"
               "property int label\nproperty float intensity\n"
               "end_header\n"
               "0 0 0 1 0.5\n1 1 1 0 0.25\n");
    const auto c = read_point_cloud(p.string());
    REQUIRE(c.labels.has_value());
    REQUIRE(c.intensities.has_value());
    CHECK((*c.labels)[0] == 1);
    CHECK((*c.labels)[1] == 0);
    CHECK((*c.intensities)[1] == 0.25);
}

TEST_CASE("PLY 'class' property maps to labels") {
    const auto p = tmpdir() / "class.ply";
    write_file(p,
               "ply\nformat ascii 1.0\nelement vertex 1\n"
               "property float x\nproperty float y\nproperty float z\nproperty uchar class\n"
               "end_header\n1 2 3 7\n");
    const auto c = read_point_cloud(p.string());
    REQUIRE(c.labels.has_value());
    CHECK((*c.labels)[0] == 7);
}

TEST_CASE("truncated ascii PLY raises ParseError") {
    const auto p = tmpdir() / "short.ply";
    write_file(p,
               "ply\nformat ascii 1.0\nelement vertex 10\n"
               "property float x\nproperty float y\nproperty float z\n"
               "end_header\n"
               "1 2 3\n4 5 6\n7 8 9\n1 1 1\n2 2 2\n3 3 3\n4 4 4\n5 5 5\n6 6 6\n");
    CHECK_THROWS_AS(read_point_cloud(p.string()), ParseError);
}

TEST_CASE("PLY without z raises MissingProperty") {
    const auto p = tmpdir() / "noz.ply";
    write_file(p,
               "ply\nformat ascii 1.0\nelement vertex 1\n"
               "property float x\nproperty float y\nend_header\n1 2\n");
    CHECK_THROWS_AS(read_point_cloud(p.string()), MissingProperty);
}

TEST_CASE("binary PLY round-trip is exact") {
    PointCloud c;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    c.labels = std::vector<int32_t>();
    c.intensities = std::vector<double>();
    for (int i = 0; i < 5000; ++i) {
        c.points.push_back({u(rng), u(rng), u(rng)});
        c.labels->push_back(static_cast<int32_t>(rng() % 5));
        c.intensities->push_back(u(rng));
    }
    const auto p = tmpdir() / "rt.ply";
    write_point_cloud(c, p.string());
    const auto back = read_point_cloud(p.string());
    REQUIRE(back.size() == c.size());
    REQUIRE(back.labels.has_value());
    REQUIRE(back.intensities.has_value());
    for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK(back.points[i].x == c.points[i].x);
        CHECK(back.points[i].y == c.points[i].y);
        CHECK(back.points[i].z == c.points[i].z);
    }
    CHECK(*back.labels == *c.labels);
    CHECK(*back.intensities == *c.intensities);
}

TEST_CASE("large binary round-trip") {
    PointCloud c;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1e4, 1e4);
    c.points.reserve(1000000);
    for (int i = 0; i < 1000000; ++i) c.points.push_back({u(rng), u(rng), u(rng)});
    const auto p = tmpdir() / "big.ply";
    write_point_cloud(c, p.string());
    const auto back = read_point_cloud(p.string());
    REQUIRE(back.size() == c.size());
    bool same = true;
    for (std::size_t i = 0; i < c.size(); ++i)
        same = same && back.points[i].x == c.points[i].x && back.points[i].y == c.points[i].y &&
               back.points[i].z == c.points[i].z;
    CHECK(same);
    fs::remove(p);
}

TEST_CASE("empty cloud writes a valid PLY") {
    const auto p = tmpdir() / "empty.ply";
    write_point_cloud(PointCloud{}, p.string());
    const auto back = read_point_cloud(p.string());
    CHECK(back.empty());
}

TEST_CASE("2x2 P5 PGM") {
    const auto p = tmpdir() / "tiny.pgm";
    std::string data = "P5\n2 2\n255\n";
    data.push_back(char(255));
    data.push_back(char(0));
    data.push_back(char(0));
    data.push_back(char(255));
    write_file(p, data);
    const auto r = read_raster(p.string());
    REQUIRE(r.width == 2);
    REQUIRE(r.height == 2);
    CHECK(r.at(0, 0) == 1);
    CHECK(r.at(1, 0) == 0);
    CHECK(r.at(0, 1) == 0);
    CHECK(r.at(1, 1) == 1);
}

TEST_CASE("P2 PGM with comments") {
    const auto p = tmpdir() / "ascii.pgm";
    write_file(p, "P2\n# a comment\n3 1\n255\n255 0 128\n");
    const auto r = read_raster(p.string());
    CHECK(r.at(0, 0) == 1);
    CHECK(r.at(1, 0) == 0);
    CHECK(r.at(2, 0) == 1);
}

TEST_CASE("PPM with world file gets its GeoTransform") {
    const auto p = tmpdir() / "map.ppm";
    ColorRaster img(4, 3);
    for (auto& v : img.rgb) v = 100;
    write_ppm(img, p.string());
    write_file(tmpdir() / "map.wld", "0.512\n0\n0\n0.512\n100.256\n200.256\n");
    const auto back = read_color_raster(p.string());
    CHECK(back.geo.meters_per_pixel == Catch::Approx(0.512));
    CHECK(back.geo.origin_x == Catch::Approx(100.0));
    CHECK(back.geo.origin_y == Catch::Approx(200.0));
    fs::remove(tmpdir() / "map.wld");
}

TEST_CASE("negative-y world file flips rows to y-up") {
    const auto p = tmpdir() / "flip.pgm";
    std::string data = "P5\n1 2\n255\n";
    data.push_back(char(255));  // file top row
    data.push_back(char(0));    // file bottom row
    write_file(p, data);
    write_file(tmpdir() / "flip.wld", "1\n0\n0\n-1\n0.5\n9.5\n");
    const auto r = read_raster(p.string());
    // file top row (set) is the northernmost -> internal y=1
    CHECK(r.at(0, 1) == 1);
    CHECK(r.at(0, 0) == 0);
    CHECK(r.geo.origin_y == Catch::Approx(8.0));
    fs::remove(tmpdir() / "flip.wld");
}

TEST_CASE("truncated PGM raises ParseError") {
    const auto p = tmpdir() / "trunc.pgm";
    std::string data = "P5\n4 4\n255\n";
    data.push_back(char(1));
    write_file(p, data);
    CHECK_THROWS_AS(read_raster(p.string()), ParseError);
}

TEST_CASE("unknown raster magic raises UnsupportedFormat") {
    const auto p = tmpdir() / "weird.img";
    write_file(p, "XYZZY");
    CHECK_THROWS_AS(read_color_raster(p.string()), UnsupportedFormat);
}

TEST_CASE("ppm round-trip preserves bytes and world file round-trips") {
    ColorRaster img(5, 4);
    std::mt19937_64 rng(5);
    for (auto& v : img.rgb) v = static_cast<uint8_t>(rng());
    img.geo.origin_x = 10.0;
    img.geo.origin_y = -3.0;
    img.geo.meters_per_pixel = 0.25;
    const auto p = tmpdir() / "rt.ppm";
    write_ppm(img, p.string());
    write_world_file(img.geo, p.string());
    const auto back = read_color_raster(p.string());
    CHECK(back.rgb == img.rgb);
    CHECK(back.geo.origin_x == Catch::Approx(img.geo.origin_x));
    CHECK(back.geo.origin_y == Catch::Approx(img.geo.origin_y));
    CHECK(back.geo.meters_per_pixel == Catch::Approx(img.geo.meters_per_pixel));
}

TEST_CASE("esri ascii grid round-trip with no_data") {
    GeoTransform g;
    g.origin_x = 100.0;
    g.origin_y = 50.0;
    g.meters_per_pixel = 2.0;
    ElevationGrid grid(3, 2, g);
    grid.at(0, 0) = 1.5;
    grid.at(1, 0) = 2.5;
    grid.at(2, 0) = ElevationGrid::no_data;
    grid.at(0, 1) = -4.25;
    grid.at(1, 1) = 0.0;
    grid.at(2, 1) = 10.0;
    const auto p = tmpdir() / "grid.asc";
    write_esri_ascii(grid, p.string());
    const auto back = read_esri_ascii(p.string());
    REQUIRE(back.width == 3);
    REQUIRE(back.height == 2);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 3; ++x) CHECK(back.at(x, y) == grid.at(x, y));
    CHECK(back.geo.origin_x == Catch::Approx(100.0));
    CHECK(back.geo.origin_y == Catch::Approx(50.0));
    CHECK(back.geo.meters_per_pixel == Catch::Approx(2.0));
}

TEST_CASE("esri grid without NODATA_value line") {
    const auto p = tmpdir() / "nd.asc";
    write_file(p, "ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n3.5 4.5\n");
    const auto g = read_esri_ascii(p.string());
    CHECK(g.at(0, 0) == 3.5);
    CHECK(g.at(1, 0) == 4.5);
}
