#include "shapecomp/dsd.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace shapecomp::dsd {

ConstructorVector::ConstructorVector(std::vector<std::uint8_t> b) : bits(std::move(b)) {
    bool any = false;
    for (auto v : bits) {
        if (v > 1) throw std::invalid_argument("ConstructorVector: entries must be 0/1");
        any = any || v;
    }
    if (!any) throw std::invalid_argument("ConstructorVector: all-zero vector");
}

std::vector<double> BearingMatrix::apply(const std::vector<double>& alpha) const {
    if (alpha.size() != shape_count)
        throw std::invalid_argument("BearingMatrix: alpha length mismatch");
    std::vector<double> beta(rows.size(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < shape_count; ++j)
            if (rows[i][j]) beta[i] += alpha[j];
    return beta;
}

std::string BearingMatrix::to_text() const {
    std::string out;
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out.push_back(' ');
            out.push_back(row[j] ? '1' : '0');
        }
        out.push_back('\n');
    }
    return out;
}

CompositionSpec::CompositionSpec(std::vector<int> inc, std::vector<int> exc)
    : include(std::move(inc)), exclude(std::move(exc)) {
    std::sort(include.begin(), include.end());
    std::sort(exclude.begin(), exclude.end());
    if (include.empty())
        throw std::invalid_argument("CompositionSpec: include set must be nonempty");
    if (std::adjacent_find(include.begin(), include.end()) != include.end() ||
        std::adjacent_find(exclude.begin(), exclude.end()) != exclude.end())
        throw std::invalid_argument("CompositionSpec: duplicate index");
    for (int j : exclude)
        if (std::binary_search(include.begin(), include.end(), j))
            throw std::invalid_argument("CompositionSpec: include and exclude overlap");
}

namespace {

void check_shapes(const std::vector<ShapeMask>& shapes) {
    if (shapes.empty()) throw std::invalid_argument("dsd: empty shape list");
    for (const auto& s : shapes)
        if (!(s.grid() == shapes.front().grid()))
            throw std::invalid_argument("dsd: shapes on different grids");
}

void check_spec_indices(const std::vector<ShapeMask>& shapes, const CompositionSpec& spec) {
    const int n = static_cast<int>(shapes.size());
    for (int j : spec.include)
        if (j < 0 || j >= n) throw std::out_of_range("dsd: include index out of range");
    for (int j : spec.exclude)
        if (j < 0 || j >= n) throw std::out_of_range("dsd: exclude index out of range");
}

}  // namespace

Decomposition decompose(const std::vector<ShapeMask>& shapes) {
    check_shapes(shapes);
    const std::size_t n = shapes.size();
    PixelSet all(shapes.front().grid());
    for (const auto& s : shapes) all |= s.pixels;

    // Group pixels of the union by membership signature; std::map over the
    // 0/1 byte string sorts signatures lexicographically, which is exactly
    // the canonical shapelet order.
    std::map<std::string, PixelSet> groups;
    std::string key(n, '\0');
    all.for_each([&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j)
            key[j] = shapes[j].pixels.test(i) ? 1 : 0;
        auto it = groups.try_emplace(key, shapes.front().grid()).first;
        it->second.set(i);
    });

    Decomposition out;
    out.bearing.shape_count = n;
    out.index_sets.assign(n, {});
    for (auto& [sig, pixels] : groups) {
        std::vector<std::uint8_t> bits(sig.begin(), sig.end());
        const std::size_t row = out.shapelets.size();
        for (std::size_t j = 0; j < n; ++j)
            if (bits[j]) out.index_sets[j].push_back(row);
        out.bearing.rows.push_back(bits);
        out.shapelets.push_back({std::move(pixels), ConstructorVector(std::move(bits))});
    }
    return out;
}

PixelSet compose_region(const std::vector<ShapeMask>& shapes, const CompositionSpec& spec) {
    check_shapes(shapes);
    check_spec_indices(shapes, spec);
    PixelSet region(shapes.front().grid());
    for (int j : spec.include) region |= shapes[static_cast<std::size_t>(j)].pixels;
    for (int j : spec.exclude) region -= shapes[static_cast<std::size_t>(j)].pixels;
    return region;
}

bool is_nonredundant(const std::vector<ShapeMask>& shapes, const CompositionSpec& spec) {
    check_shapes(shapes);
    check_spec_indices(shapes, spec);
    const PixelSet full = compose_region(shapes, spec);
    for (std::size_t k = 0; k < spec.include.size(); ++k) {
        if (spec.include.size() == 1) {
            // Dropping the last include shape leaves the empty composition;
            // it differs iff the full region is nonempty.
            if (full.empty()) return false;
            continue;
        }
        std::vector<int> inc = spec.include;
        inc.erase(inc.begin() + static_cast<std::ptrdiff_t>(k));
        if (compose_region(shapes, CompositionSpec(inc, spec.exclude)) == full)
            return false;
    }
    for (std::size_t k = 0; k < spec.exclude.size(); ++k) {
        std::vector<int> exc = spec.exclude;
        exc.erase(exc.begin() + static_cast<std::ptrdiff_t>(k));
        if (compose_region(shapes, CompositionSpec(spec.include, exc)) == full)
            return false;
    }
    return true;
}

PartitionReport verify_partition_properties(
    const std::vector<ShapeMask>& shapes, const std::vector<Shapelet>& shapelets,
    const std::vector<std::vector<std::size_t>>& index_sets) {
    check_shapes(shapes);
    const PixelGrid grid = shapes.front().grid();
    PartitionReport report;

    report.shapelets_disjoint = true;
    std::size_t total = 0;
    PixelSet shapelet_union(grid);
    for (const auto& om : shapelets) {
        if (shapelet_union.intersects(om.pixels)) report.shapelets_disjoint = false;
        shapelet_union |= om.pixels;
        total += om.pixels.count();
    }
    report.shapelets_disjoint = report.shapelets_disjoint && total == shapelet_union.count();

    PixelSet shape_union(grid);
    for (const auto& s : shapes) shape_union |= s.pixels;
    report.covers_union = shapelet_union == shape_union;

    report.reassembles_shapes = index_sets.size() == shapes.size();
    if (report.reassembles_shapes) {
        for (std::size_t j = 0; j < shapes.size(); ++j) {
            PixelSet rebuilt(grid);
            for (std::size_t i : index_sets[j]) {
                if (i >= shapelets.size()) {
                    report.reassembles_shapes = false;
                    break;
                }
                rebuilt |= shapelets[i].pixels;
            }
            if (!(rebuilt == shapes[j].pixels)) {
                report.reassembles_shapes = false;
                break;
            }
        }
    }
    return report;
}

BigInt count_compositions(int n_s, std::optional<int> s) {
    if (n_s < 1) throw std::invalid_argument("count_compositions: n_s must be >= 1");
    if (!s) {
        BigInt three = boost::multiprecision::pow(BigInt(3), static_cast<unsigned>(n_s));
        BigInt two = boost::multiprecision::pow(BigInt(2), static_cast<unsigned>(n_s));
        return three - two + 1;
    }
    if (*s < 0 || *s > n_s)
        throw std::invalid_argument("count_compositions: need 0 <= s <= n_s");
    BigInt total = 1;
    BigInt binom = 1;  // C(n_s, k) built incrementally
    for (int k = 1; k <= *s; ++k) {
        binom = binom * (n_s - k + 1) / k;
        total += binom * (boost::multiprecision::pow(BigInt(2), static_cast<unsigned>(k)) - 1);
    }
    return total;
}

}  // namespace shapecomp::dsd
