#pragma once

// File formats: PLY clouds (ascii + binary little-endian), PGM/PPM rasters,
// optional PNG via libpng, world-file sidecars, and Esri ASCII grids.

#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "georeg/errors.hpp"
#include "georeg/model.hpp"

#ifdef GEOREG_HAS_PNG
#include <png.h>
#endif

namespace georeg {

namespace detail {

inline std::string read_token(std::istream& in) {
    std::string t;
    in >> t;
    return t;
}

struct PlyProperty {
    std::string type;
    std::string name;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> props;
};

inline std::size_t ply_type_size(const std::string& t) {
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" || t == "float32")
        return 4;
    if (t == "double" || t == "float64" || t == "int64" || t == "uint64") return 8;
    throw ParseError("unknown PLY property type: " + t);
}

inline double ply_read_binary_value(const char* p, const std::string& t) {
    auto load = [&]<typename T>() {
        T v;
        std::memcpy(&v, p, sizeof(T));
        return static_cast<double>(v);
    };
    if (t == "char" || t == "int8") return load.operator()<int8_t>();
    if (t == "uchar" || t == "uint8") return load.operator()<uint8_t>();
    if (t == "short" || t == "int16") return load.operator()<int16_t>();
    if (t == "ushort" || t == "uint16") return load.operator()<uint16_t>();
    if (t == "int" || t == "int32") return load.operator()<int32_t>();
    if (t == "uint" || t == "uint32") return load.operator()<uint32_t>();
    if (t == "float" || t == "float32") return load.operator()<float>();
    if (t == "double" || t == "float64") return load.operator()<double>();
    if (t == "int64") return load.operator()<int64_t>();
    if (t == "uint64") return load.operator()<uint64_t>();
    throw ParseError("unknown PLY property type: " + t);
}

}  // namespace detail

inline PointCloud read_point_cloud(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line != "ply") throw ParseError(path + ": not a PLY file (missing magic)");

    enum class Fmt { Ascii, BinaryLE } fmt = Fmt::Ascii;
    std::vector<detail::PlyElement> elements;
    bool header_done = false;
    std::size_t header_lines = 1;
    while (std::getline(in, line)) {
        ++header_lines;
        if (line.size() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string kw;
        ls >> kw;
        if (kw == "comment" || kw.empty()) continue;
        if (kw == "format") {
            std::string f;
            ls >> f;
            if (f == "ascii")
                fmt = Fmt::Ascii;
            else if (f == "binary_little_endian")
                fmt = Fmt::BinaryLE;
            else
                throw UnsupportedFormat(path + ": PLY format " + f + " not supported");
        } else if (kw == "element") {
            detail::PlyElement e;
            ls >> e.name >> e.count;
            elements.push_back(e);
        } else if (kw == "property") {
            if (elements.empty()) throw ParseError(path + ": property before element");
            std::string type;
            ls >> type;
            if (type == "list") throw UnsupportedFormat(path + ": list properties not supported");
            detail::PlyProperty p;
            p.type = type;
            ls >> p.name;
            elements.back().props.push_back(p);
        } else if (kw == "end_header") {
            header_done = true;
            break;
        } else {
            throw ParseError(path + ": unexpected header keyword '" + kw + "' at line " +
                             std::to_string(header_lines));
        }
    }
    if (!header_done) throw ParseError(path + ": missing end_header");

    const detail::PlyElement* vertex = nullptr;
    for (const auto& e : elements)
        if (e.name == "vertex") vertex = &e;
    if (!vertex) throw ParseError(path + ": no vertex element");

    int ix = -1, iy = -1, iz = -1, ilabel = -1, iintensity = -1;
    for (std::size_t i = 0; i < vertex->props.size(); ++i) {
        const auto& name = vertex->props[i].name;
        if (name == "x") ix = static_cast<int>(i);
        else if (name == "y") iy = static_cast<int>(i);
        else if (name == "z") iz = static_cast<int>(i);
        else if (name == "label" || name == "class") ilabel = static_cast<int>(i);
        else if (name == "intensity") iintensity = static_cast<int>(i);
    }
    if (ix < 0 || iy < 0 || iz < 0) throw MissingProperty(path + ": vertex needs x, y, z");

    PointCloud cloud;
    cloud.points.reserve(vertex->count);
    if (ilabel >= 0) cloud.labels = std::vector<int32_t>();
    if (iintensity >= 0) cloud.intensities = std::vector<double>();

    // Elements before "vertex" in binary files would need skipping; only the
    // vertex-first layout (what write_point_cloud emits) is supported.
    if (elements.front().name != "vertex" && fmt == Fmt::BinaryLE)
        throw UnsupportedFormat(path + ": vertex must be the first element in binary PLY");

    if (fmt == Fmt::Ascii) {
        std::vector<double> row(vertex->props.size());
        for (std::size_t r = 0; r < vertex->count; ++r) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (!(in >> row[c]))
                    throw ParseError(path + ": truncated vertex data at row " + std::to_string(r));
            }
            cloud.points.push_back({row[static_cast<std::size_t>(ix)],
                                    row[static_cast<std::size_t>(iy)],
                                    row[static_cast<std::size_t>(iz)]});
            if (ilabel >= 0)
                cloud.labels->push_back(static_cast<int32_t>(row[static_cast<std::size_t>(ilabel)]));
            if (iintensity >= 0) cloud.intensities->push_back(row[static_cast<std::size_t>(iintensity)]);
        }
        // A row that parses entirely as numbers beyond the declared count is
        // not an error; but fewer rows than declared is.
    } else {
        std::size_t stride = 0;
        std::vector<std::size_t> offsets(vertex->props.size());
        for (std::size_t i = 0; i < vertex->props.size(); ++i) {
            offsets[i] = stride;
            stride += detail::ply_type_size(vertex->props[i].type);
        }
        std::vector<char> buf(stride);
        for (std::size_t r = 0; r < vertex->count; ++r) {
            in.read(buf.data(), static_cast<std::streamsize>(stride));
            if (static_cast<std::size_t>(in.gcount()) != stride)
                throw ParseError(path + ": truncated binary vertex data at byte offset " +
                                 std::to_string(static_cast<std::size_t>(in.tellg())));
            auto get = [&](int i) {
                return detail::ply_read_binary_value(buf.data() + offsets[static_cast<std::size_t>(i)],
                                                     vertex->props[static_cast<std::size_t>(i)].type);
            };
            cloud.points.push_back({get(ix), get(iy), get(iz)});
            if (ilabel >= 0) cloud.labels->push_back(static_cast<int32_t>(get(ilabel)));
            if (iintensity >= 0) cloud.intensities->push_back(get(iintensity));
        }
    }
    return cloud;
}

inline void write_point_cloud(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << cloud.size() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    if (cloud.labels) out << "property int label\n";
    if (cloud.intensities) out << "property double intensity\n";
    out << "end_header\n";
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& p = cloud.points[i];
        out.write(reinterpret_cast<const char*>(&p.x), 8);
        out.write(reinterpret_cast<const char*>(&p.y), 8);
        out.write(reinterpret_cast<const char*>(&p.z), 8);
        if (cloud.labels) {
            const int32_t l = (*cloud.labels)[i];
            out.write(reinterpret_cast<const char*>(&l), 4);
        }
        if (cloud.intensities) {
            const double v = (*cloud.intensities)[i];
            out.write(reinterpret_cast<const char*>(&v), 8);
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

namespace detail {

// Reads the next PNM token, skipping whitespace and '#' comments.
inline std::string pnm_token(std::istream& in, const std::string& path) {
    std::string t;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (!std::isspace(c)) {
            t.push_back(static_cast<char>(c));
            while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#')
                t.push_back(static_cast<char>(in.get()));
            return t;
        }
    }
    throw ParseError(path + ": truncated header");
}

inline int pnm_int(std::istream& in, const std::string& path) {
    const std::string t = pnm_token(in, path);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size())
        throw ParseError(path + ": bad integer token '" + t + "'");
    return v;
}

}  // namespace detail

// Sidecar world file: 6-line affine. Only axis-aligned isotropic transforms
// map onto GeoTransform; skewed ones are rejected. For the common
// negative-y convention the caller is expected to flip rows (see
// read_color_raster / read_raster).
struct WorldFile {
    double a = 1, d = 0, b = 0, e = 1, c = 0, f = 0;  // x' = a*px + b*py + c ...
};

inline std::optional<WorldFile> read_world_file(const std::string& raster_path) {
    std::filesystem::path p(raster_path);
    p.replace_extension(".wld");
    std::ifstream in(p);
    if (!in) return std::nullopt;
    WorldFile w;
    if (!(in >> w.a >> w.d >> w.b >> w.e >> w.c >> w.f))
        throw ParseError(p.string() + ": world file needs 6 numbers");
    return w;
}

namespace detail {

template <typename Raster>
inline void apply_world_file(Raster& r, const std::optional<WorldFile>& wf, double fallback_mpp) {
    if (!wf) {
        r.geo.meters_per_pixel = fallback_mpp;
        return;
    }
    if (wf->b != 0.0 || wf->d != 0.0) throw UnsupportedFormat("skewed world files not supported");
    if (std::abs(std::abs(wf->a) - std::abs(wf->e)) > 1e-12 * std::abs(wf->a))
        throw UnsupportedFormat("anisotropic world files not supported");
    r.geo.meters_per_pixel = std::abs(wf->a);
    // World files give pixel-center coordinates of pixel (0,0).
    r.geo.origin_x = wf->c - 0.5 * r.geo.meters_per_pixel;
    // Negative e: rows run north->south in the file; flip to the internal
    // y-up convention.
    if (wf->e < 0.0) {
        const double mpp = r.geo.meters_per_pixel;
        r.geo.origin_y = wf->f - (r.height - 0.5) * mpp;
        for (int y = 0; y < r.height / 2; ++y) {
            const int y2 = r.height - 1 - y;
            for (int x = 0; x < r.width; ++x) {
                if constexpr (requires { r.bits; }) {
                    std::swap(r.bits[static_cast<std::size_t>(y) * r.width + x],
                              r.bits[static_cast<std::size_t>(y2) * r.width + x]);
                } else {
                    for (int ch = 0; ch < 3; ++ch)
                        std::swap(r.rgb[(static_cast<std::size_t>(y) * r.width + x) * 3 + ch],
                                  r.rgb[(static_cast<std::size_t>(y2) * r.width + x) * 3 + ch]);
                }
            }
        }
    } else {
        r.geo.origin_y = wf->f - 0.5 * r.geo.meters_per_pixel;
    }
}

#ifdef GEOREG_HAS_PNG
inline ColorRaster read_png(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw IoError("cannot open " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw ParseError(path + ": libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw ParseError(path + ": PNG decode error");
    }
    png_init_io(png, fp);
    png_read_info(png, info);
    png_set_strip_16(png);
    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    png_set_strip_alpha(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
        png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_read_update_info(png, info);
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    ColorRaster img(w, h);
    std::vector<png_bytep> rows(static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) rows[static_cast<std::size_t>(y)] = img.pixel(0, y);
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return img;
}
#endif

}  // namespace detail

inline BinaryRaster read_raster(const std::string& path, double fallback_mpp = 1.0) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    const std::string magic = detail::pnm_token(in, path);
    if (magic != "P2" && magic != "P5") throw UnsupportedFormat(path + ": expected PGM (P2/P5)");
    const int w = detail::pnm_int(in, path);
    const int h = detail::pnm_int(in, path);
    const int maxval = detail::pnm_int(in, path);
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
        throw ParseError(path + ": bad PGM dimensions/maxval");
    BinaryRaster r(w, h);
    if (magic == "P5") {
        in.get();  // single whitespace after maxval
        std::vector<char> buf(static_cast<std::size_t>(w) * h);
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (static_cast<std::size_t>(in.gcount()) != buf.size())
            throw ParseError(path + ": truncated pixel data");
        for (std::size_t i = 0; i < buf.size(); ++i)
            r.bits[i] = static_cast<uint8_t>(buf[i]) > maxval / 2 ? 1 : 0;
    } else {
        for (std::size_t i = 0; i < r.bits.size(); ++i)
            r.bits[i] = detail::pnm_int(in, path) > maxval / 2 ? 1 : 0;
    }
    detail::apply_world_file(r, read_world_file(path), fallback_mpp);
    return r;
}

inline ColorRaster read_color_raster(const std::string& path, double fallback_mpp = 1.0) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoError("cannot open " + path);
    unsigned char sig[8] = {};
    probe.read(reinterpret_cast<char*>(sig), 8);
    probe.close();
    ColorRaster img;
    if (sig[0] == 0x89 && sig[1] == 'P' && sig[2] == 'N' && sig[3] == 'G') {
#ifdef GEOREG_HAS_PNG
        img = detail::read_png(path);
#else
        throw UnsupportedFormat(path + ": PNG support not compiled in");
#endif
    } else if (sig[0] == 'P' && (sig[1] == '3' || sig[1] == '6')) {
        std::ifstream in(path, std::ios::binary);
        const std::string magic = detail::pnm_token(in, path);
        const int w = detail::pnm_int(in, path);
        const int h = detail::pnm_int(in, path);
        const int maxval = detail::pnm_int(in, path);
        if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
            throw ParseError(path + ": bad PPM dimensions/maxval");
        img = ColorRaster(w, h);
        if (magic == "P6") {
            in.get();
            in.read(reinterpret_cast<char*>(img.rgb.data()),
                    static_cast<std::streamsize>(img.rgb.size()));
            if (static_cast<std::size_t>(in.gcount()) != img.rgb.size())
                throw ParseError(path + ": truncated pixel data");
        } else {
            for (auto& v : img.rgb) v = static_cast<uint8_t>(detail::pnm_int(in, path));
        }
    } else {
        throw UnsupportedFormat(path + ": expected PPM (P3/P6) or PNG");
    }
    detail::apply_world_file(img, read_world_file(path), fallback_mpp);
    return img;
}

inline void write_pgm(const BinaryRaster& r, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "P5\n" << r.width << " " << r.height << "\n255\n";
    std::vector<char> buf(r.bits.size());
    for (std::size_t i = 0; i < r.bits.size(); ++i) buf[i] = r.bits[i] ? char(255) : char(0);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

inline void write_ppm(const ColorRaster& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.rgb.data()),
              static_cast<std::streamsize>(img.rgb.size()));
}

inline void write_world_file(const GeoTransform& geo, const std::string& raster_path) {
    std::filesystem::path p(raster_path);
    p.replace_extension(".wld");
    std::ofstream out(p);
    if (!out) throw IoError("cannot write " + p.string());
    out.precision(12);
    // Positive e: rows already run south->north internally.
    out << geo.meters_per_pixel << "\n0\n0\n" << geo.meters_per_pixel << "\n"
        << geo.origin_x + 0.5 * geo.meters_per_pixel << "\n"
        << geo.origin_y + 0.5 * geo.meters_per_pixel << "\n";
}

// Esri ASCII grid. Rows in the file run north -> south; internally y is up,
// so rows are flipped on read/write.
inline ElevationGrid read_esri_ascii(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    int ncols = -1, nrows = -1;
    double xll = 0, yll = 0, cell = 1, nodata = -9999;
    bool corner = true;
    for (int i = 0; i < 5; ++i) {
        std::string key;
        if (!(in >> key)) throw ParseError(path + ": truncated header");
        for (auto& ch : key) ch = static_cast<char>(std::tolower(ch));
        if (key == "ncols") in >> ncols;
        else if (key == "nrows") in >> nrows;
        else if (key == "xllcorner") { in >> xll; corner = true; }
        else if (key == "yllcorner") in >> yll;
        else if (key == "xllcenter") { in >> xll; corner = false; }
        else if (key == "yllcenter") in >> yll;
        else if (key == "cellsize") in >> cell;
        else throw ParseError(path + ": unexpected header key " + key);
        if (!in) throw ParseError(path + ": bad header value for " + key);
    }
    {
        // NODATA_value line is optional.
        const auto pos = in.tellg();
        std::string k6;
        if (in >> k6) {
            for (auto& ch : k6) ch = static_cast<char>(std::tolower(ch));
            if (k6 == "nodata_value") {
                if (!(in >> nodata)) throw ParseError(path + ": bad NODATA_value");
            } else {
                in.seekg(pos);
            }
        }
        in.clear();
        if (pos >= 0 && k6.empty()) in.seekg(pos);
    }
    if (ncols <= 0 || nrows <= 0 || cell <= 0) throw ParseError(path + ": bad grid dimensions");
    GeoTransform geo;
    geo.meters_per_pixel = cell;
    geo.origin_x = corner ? xll : xll - cell / 2.0;
    geo.origin_y = corner ? yll : yll - cell / 2.0;
    ElevationGrid grid(ncols, nrows, geo);
    for (int row = 0; row < nrows; ++row) {
        const int y = nrows - 1 - row;  // file top row is the northernmost
        for (int x = 0; x < ncols; ++x) {
            double v;
            if (!(in >> v)) throw ParseError(path + ": truncated grid data");
            grid.at(x, y) = (v == nodata) ? ElevationGrid::no_data : v;
        }
    }
    return grid;
}

inline void write_esri_ascii(const ElevationGrid& grid, const std::string& path,
                             double nodata = -9999.0) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out.precision(10);
    out << "ncols " << grid.width << "\nnrows " << grid.height << "\n";
    out << "xllcorner " << grid.geo.origin_x << "\nyllcorner " << grid.geo.origin_y << "\n";
    out << "cellsize " << grid.geo.meters_per_pixel << "\nNODATA_value " << nodata << "\n";
    for (int row = 0; row < grid.height; ++row) {
        const int y = grid.height - 1 - row;
        for (int x = 0; x < grid.width; ++x) {
            if (x) out << " ";
            const double v = grid.at(x, y);
            out << (v == ElevationGrid::no_data ? nodata : v);
        }
        out << "\n";
    }
}

}  // namespace georeg
