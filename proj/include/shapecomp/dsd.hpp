#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "shapecomp/grid.hpp"

namespace shapecomp::dsd {

using BigInt = boost::multiprecision::cpp_int;

// Membership signature of a shapelet across the input shapes; never all-zero.
struct ConstructorVector {
    std::vector<std::uint8_t> bits;

    explicit ConstructorVector(std::vector<std::uint8_t> b);
    bool operator==(const ConstructorVector&) const = default;
};

// A maximal region with constant membership pattern across all shapes.
struct Shapelet {
    PixelSet pixels;
    ConstructorVector constructor;
};

// Stacked constructor vectors; maps shape coefficients to shapelet values.
struct BearingMatrix {
    std::size_t shape_count = 0;
    std::vector<std::vector<std::uint8_t>> rows;

    std::size_t num_rows() const { return rows.size(); }
    // beta = B alpha
    std::vector<double> apply(const std::vector<double>& alpha) const;
    // Dense 0/1 grid, row-major, space-separated.
    std::string to_text() const;
};

// Index sets (I_plus, I_minus) of a composition; include is nonempty and the
// two sets are disjoint. Indices are 0-based positions in the dictionary.
struct CompositionSpec {
    std::vector<int> include;
    std::vector<int> exclude;

    CompositionSpec(std::vector<int> inc, std::vector<int> exc);
};

struct Decomposition {
    std::vector<Shapelet> shapelets;  // lexicographic on constructor bits
    BearingMatrix bearing;
    std::vector<std::vector<std::size_t>> index_sets;  // I_j per shape
};

// Disjoint shape decomposition: partitions the union of the shapes into
// shapelets, each carrying its membership signature. Single pass over the
// union; shapelets are emitted in lexicographic order of constructor bits so
// the bearing matrix is reproducible byte-for-byte.
Decomposition decompose(const std::vector<ShapeMask>& shapes);

// (union of include shapes) \ (union of exclude shapes); possibly empty.
PixelSet compose_region(const std::vector<ShapeMask>& shapes, const CompositionSpec& spec);

// True iff removing any single index from the composition changes its pixels.
bool is_nonredundant(const std::vector<ShapeMask>& shapes, const CompositionSpec& spec);

struct PartitionReport {
    bool shapelets_disjoint = false;
    bool covers_union = false;
    bool reassembles_shapes = false;
    bool all_pass() const { return shapelets_disjoint && covers_union && reassembles_shapes; }
};

PartitionReport verify_partition_properties(
    const std::vector<ShapeMask>& shapes, const std::vector<Shapelet>& shapelets,
    const std::vector<std::vector<std::size_t>>& index_sets);

// Number of distinct compositions an n_s-shape dictionary can produce,
// including the empty selection: 3^n - 2^n + 1 unrestricted, or
// 1 + sum_{k=1..s} C(n,k) (2^k - 1) with at most s shapes.
BigInt count_compositions(int n_s, std::optional<int> s = std::nullopt);

}  // namespace shapecomp::dsd
