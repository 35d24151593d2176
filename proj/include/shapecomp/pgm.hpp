#pragma once

#include <string>

#include "shapecomp/grid.hpp"

namespace shapecomp {

// Reads a P2 (ASCII) or P5 (binary) PGM with maxval <= 65535; values are
// normalized to [0,1] by the file's maxval. Two-byte P5 samples are
// big-endian per the netpbm convention.
Image read_pgm(const std::string& path);

// Pixels with normalized value > 0.5 form the mask.
PixelSet read_pgm_mask(const std::string& path);

// Masks are written as binary P5 with values 0/255.
void write_pgm_mask(const std::string& path, const PixelSet& mask);

}  // namespace shapecomp
