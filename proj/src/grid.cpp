#include "shapecomp/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace shapecomp {

PixelGrid::PixelGrid(int w, int h) : width(w), height(h) {
    if (w < 1 || h < 1)
        throw std::invalid_argument("PixelGrid: width and height must be >= 1");
}

PixelSet::PixelSet(PixelGrid grid)
    : grid_(grid), words_((grid.size() + 63) / 64, 0) {}

PixelSet PixelSet::full(PixelGrid grid) {
    PixelSet s(grid);
    const std::size_t n = grid.size();
    for (std::size_t i = 0; i < n; ++i) s.set(i);
    return s;
}

std::size_t PixelSet::count() const {
    std::size_t c = 0;
    for (auto w : words_) c += std::popcount(w);
    return c;
}

bool PixelSet::empty() const {
    for (auto w : words_)
        if (w) return false;
    return true;
}

void PixelSet::check_same_grid(const PixelSet& other) const {
    if (!(grid_ == other.grid_))
        throw std::invalid_argument("PixelSet: grids differ");
}

bool PixelSet::contains(const PixelSet& other) const {
    check_same_grid(other);
    for (std::size_t i = 0; i < words_.size(); ++i)
        if (other.words_[i] & ~words_[i]) return false;
    return true;
}

bool PixelSet::intersects(const PixelSet& other) const {
    check_same_grid(other);
    for (std::size_t i = 0; i < words_.size(); ++i)
        if (words_[i] & other.words_[i]) return true;
    return false;
}

PixelSet& PixelSet::operator|=(const PixelSet& other) {
    check_same_grid(other);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
    return *this;
}

PixelSet& PixelSet::operator&=(const PixelSet& other) {
    check_same_grid(other);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
    return *this;
}

PixelSet& PixelSet::operator-=(const PixelSet& other) {
    check_same_grid(other);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~other.words_[i];
    return *this;
}

bool PixelSet::operator==(const PixelSet& other) const {
    return grid_ == other.grid_ && words_ == other.words_;
}

std::vector<std::uint32_t> PixelSet::to_indices() const {
    std::vector<std::uint32_t> out;
    out.reserve(count());
    for_each([&](std::size_t i) { out.push_back(static_cast<std::uint32_t>(i)); });
    return out;
}

PixelSet operator|(PixelSet a, const PixelSet& b) { return a |= b; }
PixelSet operator&(PixelSet a, const PixelSet& b) { return a &= b; }
PixelSet operator-(PixelSet a, const PixelSet& b) { return a -= b; }

ShapeMask::ShapeMask(PixelSet p) : pixels(std::move(p)) {
    if (pixels.empty())
        throw std::invalid_argument("ShapeMask: a shape must contain at least one pixel");
}

Image::Image(PixelGrid g, std::vector<double> vals, std::optional<PixelSet> obs)
    : grid(g), values(std::move(vals)), observed(std::move(obs)) {
    if (values.size() != grid.size())
        throw std::invalid_argument("Image: value count does not match grid");
    if (observed && !(observed->grid() == grid))
        throw std::invalid_argument("Image: observation mask on a different grid");
    for (std::size_t i = 0; i < values.size(); ++i)
        if (is_observed(i) && !std::isfinite(values[i]))
            throw std::invalid_argument("Image: non-finite value at an observed pixel");
}

InhomogeneityField::InhomogeneityField(PixelGrid g, std::vector<double> in,
                                       std::vector<double> ex)
    : grid(g), pi_in(std::move(in)), pi_ex(std::move(ex)) {
    if (pi_in.size() != grid.size() || pi_ex.size() != grid.size())
        throw std::invalid_argument("InhomogeneityField: size mismatch");
    for (std::size_t i = 0; i < pi_in.size(); ++i)
        if (pi_in[i] < 0.0 || pi_ex[i] < 0.0)
            throw std::invalid_argument("InhomogeneityField: measures must be nonnegative");
}

InhomogeneityField chan_vese_measures(const Image& image, double u_in, double u_ex) {
    if (u_in == u_ex)
        throw std::invalid_argument(
            "chan_vese_measures: u_in == u_ex makes every pixel a tie");
    const std::size_t n = image.grid.size();
    std::vector<double> pin(n, 0.0), pex(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!image.is_observed(i)) continue;
        const double u = image.values[i];
        pin[i] = (u - u_in) * (u - u_in);
        pex[i] = (u - u_ex) * (u - u_ex);
    }
    return {image.grid, std::move(pin), std::move(pex)};
}

std::pair<double, double> quantile_levels(const Image& image, double lo, double hi) {
    if (!(0.0 <= lo && lo < hi && hi <= 1.0))
        throw std::invalid_argument("quantile_levels: need 0 <= lo < hi <= 1");
    std::vector<double> vals;
    vals.reserve(image.grid.size());
    for (std::size_t i = 0; i < image.grid.size(); ++i)
        if (image.is_observed(i)) vals.push_back(image.values[i]);
    if (vals.empty())
        throw std::invalid_argument("quantile_levels: no observed pixels");
    std::sort(vals.begin(), vals.end());
    const auto pick = [&](double q) {
        std::size_t k = static_cast<std::size_t>(q * static_cast<double>(vals.size()));
        if (k >= vals.size()) k = vals.size() - 1;
        return vals[k];
    };
    return {pick(lo), pick(hi)};
}

ShapeIntegrals shape_integrals(const InhomogeneityField& field,
                               const std::vector<ShapeMask>& masks) {
    ShapeIntegrals out;
    out.P.reserve(masks.size());
    out.Q.reserve(masks.size());
    for (const auto& mask : masks) {
        if (!(mask.grid() == field.grid))
            throw std::invalid_argument("shape_integrals: mask on a different grid");
        double p = 0.0, q = 0.0;
        mask.pixels.for_each([&](std::size_t i) {
            const double d = field.diff(i);
            if (d > 0.0)
                p += d;
            else
                q -= d;
        });
        out.P.push_back(p);
        out.Q.push_back(q);
    }
    return out;
}

LocReport loc_holds(const InhomogeneityField& field, const ShapeMask& sigma) {
    if (!(sigma.grid() == field.grid))
        throw std::invalid_argument("loc_holds: mask on a different grid");
    LocReport report;
    for (std::size_t i = 0; i < field.grid.size(); ++i) {
        const double d = field.diff(i);
        const bool inside = sigma.pixels.test(i);
        if ((inside && !(d < 0.0)) || (!inside && !(d > 0.0))) ++report.violating_pixels;
    }
    report.holds = report.violating_pixels == 0;
    return report;
}

}  // namespace shapecomp
