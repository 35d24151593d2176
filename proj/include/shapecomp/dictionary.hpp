#pragma once

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "shapecomp/grid.hpp"

namespace shapecomp::io {

// Parametric dictionary entries. Angles are counter-clockwise degrees about
// the shape's own center (its bounding box center); right-angle multiples
// rasterize exactly.
struct RectangleEntry {
    double x = 0, y = 0, w = 0, h = 0, angle = 0;
    bool operator==(const RectangleEntry&) const = default;
};
struct DiscEntry {
    double cx = 0, cy = 0, r = 0;
    bool operator==(const DiscEntry&) const = default;
};
struct EllipseEntry {
    double cx = 0, cy = 0, rx = 0, ry = 0, angle = 0;
    bool operator==(const EllipseEntry&) const = default;
};
struct PolygonEntry {
    std::vector<std::array<double, 2>> vertices;
    bool operator==(const PolygonEntry&) const = default;
};
struct RasterEntry {
    std::string file;
    double dx = 0, dy = 0, angle = 0;
    bool operator==(const RasterEntry&) const = default;
};

struct DictionaryEntry {
    std::string label;
    std::variant<RectangleEntry, DiscEntry, EllipseEntry, PolygonEntry, RasterEntry> geometry;
    bool operator==(const DictionaryEntry&) const = default;
};

struct DictionarySpec {
    PixelGrid grid;
    std::vector<DictionaryEntry> entries;
    bool operator==(const DictionarySpec&) const = default;
};

// Parses and validates the JSON dictionary document. Duplicate labels are
// rejected; every entry must rasterize to a nonempty mask (raster entries
// resolve their file reference against base_dir). Syntax errors carry the
// line number.
DictionarySpec parse_dictionary(const std::string& text, const std::string& base_dir = ".");

std::string render_dictionary(const DictionarySpec& spec);

// Pixel-center inclusion test against the closed shape, after rotating the
// center into the shape frame.
ShapeMask rasterize(const DictionaryEntry& entry, const PixelGrid& grid,
                    const std::string& base_dir = ".");

std::vector<ShapeMask> rasterize_all(const DictionarySpec& spec,
                                     const std::string& base_dir = ".");

// Square-block dictionary generator: `nx` x `ny` equal squares of side
// `square` with centers on a uniform grid over a width x height domain.
DictionarySpec square_grid_dictionary(int width, int height, int square, int nx, int ny);

}  // namespace shapecomp::io
