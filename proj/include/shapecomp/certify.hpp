#pragma once

#include <cstddef>
#include <vector>

#include "shapecomp/dsd.hpp"
#include "shapecomp/grid.hpp"
#include "shapecomp/solver.hpp"

namespace shapecomp::certify {

// Classification of cells by the value of beta: strictly negative / above one
// (the support set), exactly zero / one (the off-support set). Entries within
// 1e-9 of 0 or 1 snap; anything else inside (0,1) is rejected.
struct SupportPartition {
    std::size_t cell_count = 0;
    std::vector<std::size_t> gamma_0minus;
    std::vector<std::size_t> gamma_1plus;
    std::vector<std::size_t> gamma_0;
    std::vector<std::size_t> gamma_1;

    std::vector<std::size_t> off_support() const;  // gamma_0 u gamma_1, ascending
};

SupportPartition partition_beta(const std::vector<double>& beta);

// Strict lower/upper bounds for the certificate entries over off-support
// cells: (q-p, q) on zero-valued cells and (-p, q-p) on unit-valued ones.
struct BoundingVectors {
    std::vector<std::size_t> cells;  // off-support cell ids, ascending (the index map)
    std::vector<double> l;
    std::vector<double> u;
};

BoundingVectors bounding_vectors(const std::vector<double>& p, const std::vector<double>& q,
                                 const SupportPartition& partition);

// e_j = sum_{l in I_j ^ Gamma_1+} p_l - sum_{l in I_j ^ Gamma_0-} q_l.
std::vector<double> loc_violation(const std::vector<double>& p, const std::vector<double>& q,
                                  const std::vector<std::vector<std::size_t>>& shape_index_sets,
                                  const SupportPartition& partition);

enum class CertificateStatus { feasible, infeasible, rank_deficient };

struct Certificate {
    CertificateStatus status = CertificateStatus::infeasible;
    bool feasible = false;
    double margin = 0.0;  // maximized slack to the strict bounds
    double eta_c = 0.0;
    std::vector<double> eta;  // per off-support cell, bounds order
    std::vector<double> c;    // realized sign vector (free entries filled in)
};

// Optimality witness search: maximizes the margin t subject to
// (B_off)^T eta + eta_c c = e and l + t <= eta <= u - t. Entries of `c` set
// to NaN are free LP variables bounded in [-1,1]. Requires |c_j| <= 1
// elsewhere. The witness certifies unique optimality only together with the
// full-row-rank condition, which is checked on the realized c.
Certificate find_certificate(const dsd::BearingMatrix& bearing, const std::vector<double>& c,
                             const std::vector<double>& e, const BoundingVectors& bounds,
                             const SupportPartition& partition);

struct TangentWitness {
    bool found = false;
    std::vector<double> alpha_hat;
    double epsilon = 0.0;
    double k = 0.0;
};

// Constructs a point of the sublevel set strictly advancing past the
// separating hyperplane: k alpha* on the composition, -epsilon elsewhere,
// with epsilon shrunk and k grown until the objective matches G(alpha*) and
// the hyperplane gain is positive. Requires the composed region to satisfy
// the lucid object condition.
TangentWitness tangent_witness_loc(const solver::SparseCscProblem& problem,
                                   const dsd::CompositionSpec& spec,
                                   const std::vector<double>& alpha_star);

struct BearingConstants {
    std::vector<std::size_t> rows;  // unit u null shapelet ids, ascending
    std::vector<double> w;          // aligned with rows
    bool bounds_ok = false;         // Prop-4.13-style ranges hold
};

// Solves (B^R restricted to the unit/null rows)^T w = -c; c is +-1 over the
// include/exclude blocks. Throws if the system is singular (the composition
// was not basic).
BearingConstants bearing_constants(const dsd::BearingMatrix& restricted_bearing,
                                   const std::vector<std::size_t>& unit_set,
                                   const std::vector<std::size_t>& null_set,
                                   const std::vector<double>& c);

// C_j per exterior shape: the w-weighted relative cell overlap with the unit
// and null shapelets. `composition_shapelets` and `w` are aligned.
std::vector<double> geometric_coherence(const dsd::Decomposition& cells,
                                        const std::vector<dsd::Shapelet>& composition_shapelets,
                                        const std::vector<int>& exterior_columns,
                                        const std::vector<double>& w);

struct RecoveryReport {
    bool row_rank_ok = false;
    bool verdict = false;
    BearingConstants constants;
    std::vector<int> exterior;         // dictionary indices of exterior shapes
    std::vector<double> coherence;     // C_j aligned with `exterior`
    std::vector<bool> exempt;          // disjoint from the composition union
};

// Full recovery check for a basic composition: stacks the off-support cell
// incidence of composition and (non-disjoint) exterior shapes, requires full
// row rank, and requires every geometric coherence below one.
RecoveryReport verify_recovery_conditions(const std::vector<ShapeMask>& dictionary,
                                          const dsd::CompositionSpec& spec);

}  // namespace shapecomp::certify
