#include "shapecomp/pgm.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>
#include <string>

namespace shapecomp {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error("pgm: " + path + ": " + what);
}

// Reads the next header token, skipping whitespace and '#' comment lines.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) continue;
        tok.push_back(static_cast<char>(c));
        while ((c = in.get()) != EOF && !std::isspace(c) && c != '#')
            tok.push_back(static_cast<char>(c));
        if (c == '#') in.unget();
        return tok;
    }
    return tok;
}

long parse_number(std::istream& in, const std::string& path) {
    const std::string tok = next_token(in);
    if (tok.empty()) fail(path, "unexpected end of header");
    try {
        return std::stol(tok);
    } catch (const std::exception&) {
        fail(path, "bad header token '" + tok + "'");
    }
}

}  // namespace

Image read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");

    const std::string magic = next_token(in);
    if (magic != "P2" && magic != "P5") fail(path, "not a P2/P5 PGM");

    const long width = parse_number(in, path);
    const long height = parse_number(in, path);
    const long maxval = parse_number(in, path);
    if (width < 1 || height < 1) fail(path, "bad dimensions");
    if (maxval < 1 || maxval > 65535) fail(path, "maxval out of range");

    PixelGrid grid(static_cast<int>(width), static_cast<int>(height));
    std::vector<double> values(grid.size());

    if (magic == "P2") {
        for (auto& v : values) {
            const long s = parse_number(in, path);
            if (s < 0 || s > maxval) fail(path, "sample out of range");
            v = static_cast<double>(s) / static_cast<double>(maxval);
        }
    } else {
        // next_token consumed the single whitespace after maxval, so the
        // raster begins immediately.
        const bool two_byte = maxval > 255;
        for (auto& v : values) {
            int hi = in.get();
            if (hi == EOF) fail(path, "truncated raster");
            long s = hi;
            if (two_byte) {
                int lo = in.get();
                if (lo == EOF) fail(path, "truncated raster");
                s = (s << 8) | lo;
            }
            if (s > maxval) fail(path, "sample out of range");
            v = static_cast<double>(s) / static_cast<double>(maxval);
        }
    }
    return Image(grid, std::move(values));
}

PixelSet read_pgm_mask(const std::string& path) {
    const Image img = read_pgm(path);
    PixelSet mask(img.grid);
    for (std::size_t i = 0; i < img.grid.size(); ++i)
        if (img.values[i] > 0.5) mask.set(i);
    return mask;
}

void write_pgm_mask(const std::string& path, const PixelSet& mask) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");
    const PixelGrid& grid = mask.grid();
    out << "P5\n" << grid.width << " " << grid.height << "\n255\n";
    std::string row(static_cast<std::size_t>(grid.width), '\0');
    for (int y = 0; y < grid.height; ++y) {
        for (int x = 0; x < grid.width; ++x)
            row[static_cast<std::size_t>(x)] =
                mask.test(grid.index(x, y)) ? static_cast<char>(255) : '\0';
        out.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
    if (!out) fail(path, "write failed");
}

}  // namespace shapecomp
