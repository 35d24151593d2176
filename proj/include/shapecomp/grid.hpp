#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace shapecomp {

// Discrete imaging domain: a fixed raster of width*height pixels, indexed
// row-major in [0, width*height).
struct PixelGrid {
    int width = 0;
    int height = 0;

    PixelGrid() = default;
    PixelGrid(int w, int h);

    std::size_t size() const { return static_cast<std::size_t>(width) * height; }
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
    int x_of(std::size_t i) const { return static_cast<int>(i % width); }
    int y_of(std::size_t i) const { return static_cast<int>(i / width); }
    bool operator==(const PixelGrid&) const = default;
};

// A set of pixels on a grid, stored as a packed bitset. May be empty; shapes
// impose non-emptiness on top of this.
class PixelSet {
  public:
    PixelSet() = default;
    explicit PixelSet(PixelGrid grid);
    static PixelSet full(PixelGrid grid);

    const PixelGrid& grid() const { return grid_; }

    bool test(std::size_t i) const {
        return (words_[i >> 6] >> (i & 63)) & 1u;
    }
    void set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
    void reset(std::size_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }

    std::size_t count() const;
    bool empty() const;
    bool contains(const PixelSet& other) const;  // superset test
    bool intersects(const PixelSet& other) const;

    PixelSet& operator|=(const PixelSet& other);
    PixelSet& operator&=(const PixelSet& other);
    PixelSet& operator-=(const PixelSet& other);
    bool operator==(const PixelSet& other) const;

    std::vector<std::uint32_t> to_indices() const;

    template <class F>
    void for_each(F&& f) const {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits) {
                const int b = __builtin_ctzll(bits);
                f(static_cast<std::size_t>(w * 64 + b));
                bits &= bits - 1;
            }
        }
    }

  private:
    PixelGrid grid_;
    std::vector<std::uint64_t> words_;
    void check_same_grid(const PixelSet& other) const;
};

PixelSet operator|(PixelSet a, const PixelSet& b);
PixelSet operator&(PixelSet a, const PixelSet& b);
PixelSet operator-(PixelSet a, const PixelSet& b);

// A dictionary shape: a nonempty pixel set on the grid.
struct ShapeMask {
    PixelSet pixels;

    explicit ShapeMask(PixelSet p);
    const PixelGrid& grid() const { return pixels.grid(); }
    std::size_t area() const { return pixels.count(); }
};

// Gray image on a grid. `observed`, when present, marks the pixels that carry
// data; everything else is treated as missing and contributes to no measure.
struct Image {
    PixelGrid grid;
    std::vector<double> values;
    std::optional<PixelSet> observed;

    Image(PixelGrid g, std::vector<double> vals,
          std::optional<PixelSet> obs = std::nullopt);

    bool is_observed(std::size_t i) const {
        return !observed || observed->test(i);
    }
};

// Per-pixel inhomogeneity measures (both nonnegative everywhere).
struct InhomogeneityField {
    PixelGrid grid;
    std::vector<double> pi_in;
    std::vector<double> pi_ex;

    InhomogeneityField(PixelGrid g, std::vector<double> in, std::vector<double> ex);

    double diff(std::size_t i) const { return pi_in[i] - pi_ex[i]; }
};

// Per-shape (or per-cell) integrals of the positive and negative parts of
// pi_in - pi_ex. Unit pixel weight.
struct ShapeIntegrals {
    std::vector<double> P;
    std::vector<double> Q;
};

struct LocReport {
    bool holds = false;
    std::size_t violating_pixels = 0;
};

// Chan-Vese measures: pi_in = (u - u_in)^2, pi_ex = (u - u_ex)^2 at observed
// pixels, 0 at missing pixels. Rejects u_in == u_ex.
InhomogeneityField chan_vese_measures(const Image& image, double u_in, double u_ex);

// Empirical quantiles of the observed values; the lower quantile maps to u_in
// (dark foreground). Quantile rule: sorted[v min(n-1, floor(q*n))].
std::pair<double, double> quantile_levels(const Image& image, double lo, double hi);

ShapeIntegrals shape_integrals(const InhomogeneityField& field,
                               const std::vector<ShapeMask>& masks);

// Lucid object condition: pi_in < pi_ex on every pixel of sigma and
// pi_in > pi_ex everywhere else. Ties count as violations.
LocReport loc_holds(const InhomogeneityField& field, const ShapeMask& sigma);

}  // namespace shapecomp
