#include "shapecomp/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "shapecomp/pgm.hpp"

namespace shapecomp::io {

namespace {

using nlohmann::json;

constexpr double kAngleSnap = 1e-9;

struct Rotation {
    double c = 1.0, s = 0.0;
    double cx = 0.0, cy = 0.0;

    // Inverse rotation of a point into the shape frame.
    std::pair<double, double> unrotate(double px, double py) const {
        const double dx = px - cx, dy = py - cy;
        return {cx + c * dx + s * dy, cy - s * dx + c * dy};
    }
};

// cos/sin of a CCW angle in degrees, exact at right-angle multiples.
Rotation make_rotation(double degrees, double cx, double cy) {
    Rotation r;
    r.cx = cx;
    r.cy = cy;
    const double q = degrees / 90.0;
    const double qr = std::round(q);
    if (std::abs(q - qr) <= kAngleSnap) {
        static constexpr int cos_table[4] = {1, 0, -1, 0};
        const int m = ((static_cast<long long>(qr) % 4) + 4) % 4;
        r.c = cos_table[m];
        r.s = cos_table[(m + 3) % 4];  // sin(m*90) = cos((m-1)*90)
    } else {
        const double rad = degrees * std::acos(-1.0) / 180.0;
        r.c = std::cos(rad);
        r.s = std::sin(rad);
    }
    return r;
}

bool point_on_segment(double px, double py, const std::array<double, 2>& a,
                      const std::array<double, 2>& b) {
    const double cross = (b[0] - a[0]) * (py - a[1]) - (b[1] - a[1]) * (px - a[0]);
    if (std::abs(cross) > 1e-12) return false;
    const double dot = (px - a[0]) * (px - b[0]) + (py - a[1]) * (py - b[1]);
    return dot <= 1e-12;
}

bool point_in_polygon(double px, double py, const std::vector<std::array<double, 2>>& v) {
    bool inside = false;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        if (point_on_segment(px, py, v[i], v[j])) return true;  // closed shape
        if ((v[i][1] > py) != (v[j][1] > py)) {
            const double xc =
                (v[j][0] - v[i][0]) * (py - v[i][1]) / (v[j][1] - v[i][1]) + v[i][0];
            if (px < xc) inside = !inside;
        }
    }
    return inside;
}

ShapeMask rasterize_predicate(const PixelGrid& grid,
                              const std::function<bool(double, double)>& inside,
                              const std::string& label) {
    PixelSet mask(grid);
    for (int y = 0; y < grid.height; ++y)
        for (int x = 0; x < grid.width; ++x)
            if (inside(x + 0.5, y + 0.5)) mask.set(grid.index(x, y));
    if (mask.empty())
        throw std::runtime_error("dictionary entry '" + label +
                                 "' rasterizes to an empty mask");
    return ShapeMask(std::move(mask));
}

double require_number(const json& obj, const char* key, const std::string& label) {
    if (!obj.contains(key) || !obj[key].is_number())
        throw std::runtime_error("dictionary entry '" + label + "': missing or non-numeric '" +
                                 key + "'");
    return obj[key].get<double>();
}

double optional_number(const json& obj, const char* key, double fallback,
                       const std::string& label) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number())
        throw std::runtime_error("dictionary entry '" + label + "': non-numeric '" + key + "'");
    return obj[key].get<double>();
}

}  // namespace

DictionarySpec parse_dictionary(const std::string& text, const std::string& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& err) {
        throw std::runtime_error(std::string("dictionary: ") + err.what());
    }
    if (!doc.is_object() || !doc.contains("grid") || !doc.contains("entries"))
        throw std::runtime_error("dictionary: need top-level 'grid' and 'entries'");
    const json& g = doc["grid"];
    if (!g.is_object() || !g.contains("width") || !g.contains("height"))
        throw std::runtime_error("dictionary: grid needs integer 'width' and 'height'");

    DictionarySpec spec;
    spec.grid = PixelGrid(g["width"].get<int>(), g["height"].get<int>());
    if (!doc["entries"].is_array())
        throw std::runtime_error("dictionary: 'entries' must be an array");

    std::set<std::string> seen;
    for (const json& e : doc["entries"]) {
        if (!e.is_object() || !e.contains("label") || !e.contains("type"))
            throw std::runtime_error("dictionary: every entry needs 'label' and 'type'");
        DictionaryEntry entry;
        entry.label = e["label"].get<std::string>();
        if (!seen.insert(entry.label).second)
            throw std::runtime_error("dictionary: duplicate label '" + entry.label + "'");

        const std::string type = e["type"].get<std::string>();
        if (type == "rectangle") {
            entry.geometry = RectangleEntry{
                require_number(e, "x", entry.label), require_number(e, "y", entry.label),
                require_number(e, "w", entry.label), require_number(e, "h", entry.label),
                optional_number(e, "angle", 0.0, entry.label)};
        } else if (type == "disc") {
            entry.geometry = DiscEntry{require_number(e, "cx", entry.label),
                                       require_number(e, "cy", entry.label),
                                       require_number(e, "r", entry.label)};
        } else if (type == "ellipse") {
            entry.geometry = EllipseEntry{
                require_number(e, "cx", entry.label), require_number(e, "cy", entry.label),
                require_number(e, "rx", entry.label), require_number(e, "ry", entry.label),
                optional_number(e, "angle", 0.0, entry.label)};
        } else if (type == "polygon") {
            PolygonEntry poly;
            if (!e.contains("vertices") || !e["vertices"].is_array() ||
                e["vertices"].size() < 3)
                throw std::runtime_error("dictionary entry '" + entry.label +
                                         "': polygon needs >= 3 vertices");
            for (const json& v : e["vertices"]) {
                if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
                    throw std::runtime_error("dictionary entry '" + entry.label +
                                             "': vertices must be [x,y] pairs");
                poly.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
            }
            entry.geometry = std::move(poly);
        } else if (type == "raster") {
            if (!e.contains("file") || !e["file"].is_string())
                throw std::runtime_error("dictionary entry '" + entry.label +
                                         "': raster needs a 'file'");
            RasterEntry raster;
            raster.file = e["file"].get<std::string>();
            if (e.contains("offset")) {
                const json& off = e["offset"];
                if (!off.is_array() || off.size() != 2)
                    throw std::runtime_error("dictionary entry '" + entry.label +
                                             "': offset must be [dx,dy]");
                raster.dx = off[0].get<double>();
                raster.dy = off[1].get<double>();
            }
            raster.angle = optional_number(e, "angle", 0.0, entry.label);
            entry.geometry = std::move(raster);
        } else {
            throw std::runtime_error("dictionary entry '" + entry.label +
                                     "': unknown type '" + type + "'");
        }
        spec.entries.push_back(std::move(entry));
    }

    // Validation pass: every entry must produce a nonempty mask.
    for (const auto& entry : spec.entries) rasterize(entry, spec.grid, base_dir);
    return spec;
}

std::string render_dictionary(const DictionarySpec& spec) {
    json doc;
    doc["grid"] = {{"width", spec.grid.width}, {"height", spec.grid.height}};
    doc["entries"] = json::array();
    for (const auto& entry : spec.entries) {
        json e;
        e["label"] = entry.label;
        std::visit(
            [&](const auto& geo) {
                using T = std::decay_t<decltype(geo)>;
                if constexpr (std::is_same_v<T, RectangleEntry>) {
                    e["type"] = "rectangle";
                    e["x"] = geo.x;
                    e["y"] = geo.y;
                    e["w"] = geo.w;
                    e["h"] = geo.h;
                    e["angle"] = geo.angle;
                } else if constexpr (std::is_same_v<T, DiscEntry>) {
                    e["type"] = "disc";
                    e["cx"] = geo.cx;
                    e["cy"] = geo.cy;
                    e["r"] = geo.r;
                } else if constexpr (std::is_same_v<T, EllipseEntry>) {
                    e["type"] = "ellipse";
                    e["cx"] = geo.cx;
                    e["cy"] = geo.cy;
                    e["rx"] = geo.rx;
                    e["ry"] = geo.ry;
                    e["angle"] = geo.angle;
                } else if constexpr (std::is_same_v<T, PolygonEntry>) {
                    e["type"] = "polygon";
                    e["vertices"] = json::array();
                    for (const auto& v : geo.vertices) e["vertices"].push_back({v[0], v[1]});
                } else {
                    e["type"] = "raster";
                    e["file"] = geo.file;
                    e["offset"] = {geo.dx, geo.dy};
                    e["angle"] = geo.angle;
                }
            },
            entry.geometry);
        doc["entries"].push_back(std::move(e));
    }
    return doc.dump(2);
}

ShapeMask rasterize(const DictionaryEntry& entry, const PixelGrid& grid,
                    const std::string& base_dir) {
    return std::visit(
        [&](const auto& geo) -> ShapeMask {
            using T = std::decay_t<decltype(geo)>;
            if constexpr (std::is_same_v<T, RectangleEntry>) {
                const Rotation rot =
                    make_rotation(geo.angle, geo.x + geo.w / 2.0, geo.y + geo.h / 2.0);
                return rasterize_predicate(
                    grid,
                    [&](double px, double py) {
                        auto [ux, uy] = rot.unrotate(px, py);
                        return geo.x <= ux && ux <= geo.x + geo.w && geo.y <= uy &&
                               uy <= geo.y + geo.h;
                    },
                    entry.label);
            } else if constexpr (std::is_same_v<T, DiscEntry>) {
                return rasterize_predicate(
                    grid,
                    [&](double px, double py) {
                        const double dx = px - geo.cx, dy = py - geo.cy;
                        return dx * dx + dy * dy <= geo.r * geo.r;
                    },
                    entry.label);
            } else if constexpr (std::is_same_v<T, EllipseEntry>) {
                const Rotation rot = make_rotation(geo.angle, geo.cx, geo.cy);
                return rasterize_predicate(
                    grid,
                    [&](double px, double py) {
                        auto [ux, uy] = rot.unrotate(px, py);
                        const double nx = (ux - geo.cx) / geo.rx, ny = (uy - geo.cy) / geo.ry;
                        return nx * nx + ny * ny <= 1.0;
                    },
                    entry.label);
            } else if constexpr (std::is_same_v<T, PolygonEntry>) {
                return rasterize_predicate(
                    grid,
                    [&](double px, double py) {
                        return point_in_polygon(px, py, geo.vertices);
                    },
                    entry.label);
            } else {
                const PixelSet src = read_pgm_mask(base_dir + "/" + geo.file);
                const auto indices = src.to_indices();
                double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
                for (auto i : indices) {
                    const double x = src.grid().x_of(i), y = src.grid().y_of(i);
                    lo_x = std::min(lo_x, x);
                    hi_x = std::max(hi_x, x + 1.0);
                    lo_y = std::min(lo_y, y);
                    hi_y = std::max(hi_y, y + 1.0);
                }
                const Rotation rot = make_rotation(
                    geo.angle, (lo_x + hi_x) / 2.0 + geo.dx, (lo_y + hi_y) / 2.0 + geo.dy);
                return rasterize_predicate(
                    grid,
                    [&](double px, double py) {
                        auto [ux, uy] = rot.unrotate(px, py);
                        const int sx = static_cast<int>(std::floor(ux - geo.dx));
                        const int sy = static_cast<int>(std::floor(uy - geo.dy));
                        if (sx < 0 || sy < 0 || sx >= src.grid().width ||
                            sy >= src.grid().height)
                            return false;
                        return src.test(src.grid().index(sx, sy));
                    },
                    entry.label);
            }
        },
        entry.geometry);
}

std::vector<ShapeMask> rasterize_all(const DictionarySpec& spec, const std::string& base_dir) {
    std::vector<ShapeMask> masks;
    masks.reserve(spec.entries.size());
    for (const auto& entry : spec.entries) masks.push_back(rasterize(entry, spec.grid, base_dir));
    return masks;
}

DictionarySpec square_grid_dictionary(int width, int height, int square, int nx, int ny) {
    if (width < 1 || height < 1 || square < 1 || nx < 1 || ny < 1)
        throw std::invalid_argument("square_grid_dictionary: all parameters must be >= 1");
    DictionarySpec spec;
    spec.grid = PixelGrid(width, height);
    char label[32];
    for (int row = 0; row < ny; ++row)
        for (int col = 0; col < nx; ++col) {
            const double cx = (col + 0.5) * static_cast<double>(width) / nx;
            const double cy = (row + 0.5) * static_cast<double>(height) / ny;
            std::snprintf(label, sizeof label, "sq_r%03d_c%03d", row, col);
            spec.entries.push_back(
                {label, RectangleEntry{cx - square / 2.0, cy - square / 2.0,
                                       static_cast<double>(square),
                                       static_cast<double>(square), 0.0}});
        }
    return spec;
}

}  // namespace shapecomp::io
