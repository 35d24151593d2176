#pragma once

// Shared desk-scale geometries used across the unit and acceptance suites.

#include <initializer_list>
#include <stdexcept>
#include <vector>

#include "shapecomp/dsd.hpp"
#include "shapecomp/grid.hpp"

namespace fixtures {

using shapecomp::Image;
using shapecomp::InhomogeneityField;
using shapecomp::PixelGrid;
using shapecomp::PixelSet;
using shapecomp::ShapeMask;

inline PixelSet rect_set(const PixelGrid& grid, int x0, int y0, int x1, int y1) {
    PixelSet s(grid);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) s.set(grid.index(x, y));
    return s;
}

inline ShapeMask rect_mask(const PixelGrid& grid, int x0, int y0, int x1, int y1) {
    return ShapeMask(rect_set(grid, x0, y0, x1, y1));
}

// Three overlapping shapes whose decomposition has exactly the signatures
// {100, 010, 101, 110, 111}: S3 sits inside S1 and reaches into S1^S2.
inline std::vector<ShapeMask> three_shape_geometry(PixelGrid& grid) {
    grid = PixelGrid(12, 8);
    return {rect_mask(grid, 0, 0, 8, 8), rect_mask(grid, 5, 0, 12, 8),
            rect_mask(grid, 3, 2, 7, 6)};
}

// Four shapes for the composition (S1 u S2) \ (S3 u S4); the exclude-side
// program carries the rows alpha3 <= 0, alpha3 <= -1, alpha4 <= -1,
// alpha4 <= -2, alpha4 <= -1.
inline std::vector<ShapeMask> four_shape_geometry(PixelGrid& grid) {
    grid = PixelGrid(16, 12);
    return {rect_mask(grid, 0, 2, 6, 8), rect_mask(grid, 4, 2, 10, 8),
            rect_mask(grid, 0, 6, 4, 10), rect_mask(grid, 3, 2, 7, 4)};
}

// Five rectangles, the last two made of two components each, arranged so the
// exclude program max alpha4+alpha5 has the whole segment between (-1,-2)
// and (-2,-1) optimal.
inline std::vector<ShapeMask> five_rect_degenerate(PixelGrid& grid) {
    grid = PixelGrid(12, 6);
    PixelSet s4 = rect_set(grid, 0, 0, 2, 1);
    s4 |= rect_set(grid, 4, 0, 6, 1);
    PixelSet s5 = rect_set(grid, 4, 0, 6, 1);
    s5 |= rect_set(grid, 8, 0, 10, 1);
    return {rect_mask(grid, 0, 0, 6, 4), rect_mask(grid, 2, 0, 8, 5),
            rect_mask(grid, 4, 0, 10, 4), ShapeMask(std::move(s4)), ShapeMask(std::move(s5))};
}

// Three mutually overlapping rectangles realizing all seven Venn regions,
// plus a fourth shape equal to the part of S1 outside S2 and S3.
inline std::vector<ShapeMask> example41_shapes(PixelGrid& grid) {
    grid = PixelGrid(7, 6);
    ShapeMask s1 = rect_mask(grid, 0, 0, 4, 4);
    ShapeMask s2 = rect_mask(grid, 2, 0, 6, 4);
    ShapeMask s3 = rect_mask(grid, 1, 2, 5, 6);
    PixelSet lens = s1.pixels;
    lens -= s2.pixels;
    lens -= s3.pixels;
    return {s1, s2, s3, ShapeMask(std::move(lens))};
}

// Locates the bearing-matrix row with the given signature.
inline std::size_t find_row(const shapecomp::dsd::BearingMatrix& bearing,
                            std::initializer_list<int> bits) {
    std::vector<std::uint8_t> want;
    for (int b : bits) want.push_back(static_cast<std::uint8_t>(b));
    for (std::size_t i = 0; i < bearing.rows.size(); ++i)
        if (bearing.rows[i] == want) return i;
    throw std::runtime_error("fixture: signature not present in bearing matrix");
}

// Binary-image field: u = inside_value on sigma, outside_value elsewhere,
// with Chan-Vese levels u_in/u_ex. The defaults give a field satisfying the
// lucid object condition for sigma.
inline InhomogeneityField binary_field(const PixelGrid& grid, const PixelSet& sigma,
                                       double u_in = 0.25, double u_ex = 0.75) {
    std::vector<double> values(grid.size(), 1.0);
    sigma.for_each([&](std::size_t i) { values[i] = 0.0; });
    return shapecomp::chan_vese_measures(Image(grid, std::move(values)), u_in, u_ex);
}

}  // namespace fixtures
