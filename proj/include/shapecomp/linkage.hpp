#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "shapecomp/dsd.hpp"
#include "shapecomp/grid.hpp"
#include "shapecomp/lp.hpp"

namespace shapecomp::linkage {

// The alpha-domain representative of a composition. Columns of the restricted
// bearing matrix (and hence `alpha`) follow sorted include indices, then
// sorted exclude indices; `beta` follows the canonical shapelet order of the
// restricted decomposition.
struct LinkageResult {
    std::vector<int> shape_order;             // dictionary indices per column
    std::size_t include_count = 0;
    std::vector<double> alpha;                // 1 on include, LP maximizer on exclude
    std::vector<double> beta;                 // B^R alpha
    std::vector<std::size_t> unit_shapelets;  // beta == 1, outside every exclude shape
    std::vector<std::size_t> null_shapelets;  // beta == 0, inside some exclude shape
    bool unique = false;
};

// Rows of the exclude-block bearing matrix at the null-valued shapelets.
struct DiscriminantMatrix {
    std::vector<std::vector<std::uint8_t>> rows;  // |null| x |exclude|
};

struct BasicReport {
    bool basic = false;
    std::size_t rank = 0;
    std::size_t null_count = 0;
    std::size_t exclude_count = 0;
    double min_w = 0.0;  // smallest entry of the discriminant dual, NaN if unsolvable
};

// Determines alpha for a non-redundant composition: unit coefficients on the
// include set, and on the exclude set a maximizer of the linear program whose
// constraints force the superposition to be nonpositive on every shapelet
// touched by an exclude shape. `unique` reports whether that maximizer is
// unique (probed coordinate-wise at the attained optimum).
LinkageResult linkage_alpha(const std::vector<ShapeMask>& shapes,
                            const dsd::CompositionSpec& spec);

DiscriminantMatrix discriminant_matrix(const std::vector<ShapeMask>& shapes,
                                       const dsd::CompositionSpec& spec,
                                       const LinkageResult& result);

// A composition is basic when the discriminant matrix is square full-rank
// (one null shapelet per exclude shape) and its dual system has a strictly
// positive solution; that guarantees a unique linkage outcome.
BasicReport is_basic(const std::vector<ShapeMask>& shapes, const dsd::CompositionSpec& spec);

// The direct constructive coefficients: 1 on include, -eta on exclude with
// eta the peak of the include characteristic sum. Satisfies the
// superposition bounds (>= 1 on the region, <= 0 off it) by construction.
std::vector<double> indicator_coefficients(const std::vector<ShapeMask>& shapes,
                                           const dsd::CompositionSpec& spec);

// Indices with alpha above/below the +-1e-6 support threshold.
std::pair<std::vector<int>, std::vector<int>> active_sets(const std::vector<double>& alpha);

// Embeds a linkage alpha into a full dictionary-sized vector (zeros off the
// composition).
std::vector<double> embed_alpha(const LinkageResult& result, std::size_t dictionary_size);

}  // namespace shapecomp::linkage
