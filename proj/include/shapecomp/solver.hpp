#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "shapecomp/dsd.hpp"
#include "shapecomp/grid.hpp"

namespace shapecomp::solver {

enum class Mode { constrained, regularized };

// Data of the sparse shape-composition program: the measures, the shape
// dictionary, and either an l1 budget (tau) or an l1 penalty (lambda).
struct SparseCscProblem {
    InhomogeneityField field;
    std::vector<ShapeMask> dictionary;
    Mode mode = Mode::constrained;
    double budget = 0.0;
    double penalty = 0.0;

    static SparseCscProblem constrained(InhomogeneityField field,
                                        std::vector<ShapeMask> dictionary, double tau);
    static SparseCscProblem regularized(InhomogeneityField field,
                                        std::vector<ShapeMask> dictionary, double lambda);
};

struct SolverConfig {
    int max_iters = 2500;
    double step_scale = 1.0;
    double stop_tol = 1e-7;  // relative improvement threshold
    bool polish = true;
    unsigned seed = 0;  // recorded for reproducibility of run artifacts
};

struct Solution {
    std::vector<double> alpha;
    double objective = 0.0;  // G(alpha), without the l1 penalty term
    std::pair<std::vector<int>, std::vector<int>> support;
    int iterations_used = 0;
    bool converged = false;
};

// The dictionary decomposed into disjoint cells with per-cell integrals; all
// solver iterations run in this separable basis.
struct CellBasis {
    dsd::Decomposition cells;
    std::vector<double> p;
    std::vector<double> q;
};

CellBasis build_cells(const InhomogeneityField& field,
                      const std::vector<ShapeMask>& dictionary);

// G(alpha): sum over pixels of max(d(x) L_alpha(x), d^-(x)), d = pi_in - pi_ex.
double objective(const SparseCscProblem& problem, const std::vector<double>& alpha);

// The separable form: sum_i p_i max(beta_i, 0) - q_i min(beta_i, 1).
double separable_objective(const std::vector<double>& p, const std::vector<double>& q,
                           const std::vector<double>& beta);

// A subgradient of G at alpha, accumulated through the bearing matrix. At the
// kinks beta_i in {0,1} the element p_i - q_i is chosen.
std::vector<double> subgradient(const SparseCscProblem& problem,
                                const std::vector<double>& alpha);

// Euclidean projection onto the l1 ball of radius tau.
std::vector<double> project_l1(std::vector<double> v, double tau);

Solution solve_constrained(const SparseCscProblem& problem, const SolverConfig& config);
Solution solve_regularized(const SparseCscProblem& problem, const SolverConfig& config);

struct ClosedFormSelection {
    std::vector<int> indices;  // ascending
    bool unique = true;        // false on a tie at the cut position
};

// Disjoint-dictionary closed form: the min(s, m) most-negative P_j - Q_j
// values, m the count of negative ones.
ClosedFormSelection solve_disjoint_closed_form(const ShapeIntegrals& integrals, int s);

struct BruteForceResult {
    std::optional<dsd::CompositionSpec> spec;  // nullopt = empty selection
    double value = 0.0;
};

// Exhaustive search over all compositions with at most s shapes (and the
// empty selection, value 0). Ties resolve to the lexicographically smallest
// index sets, the empty selection first. Guarded to n_s <= 14.
BruteForceResult brute_force_cardinal_sc(const SparseCscProblem& problem, int s);

// Pixels where the characteristic superposition exceeds the level, 0<level<1.
PixelSet extract_support(const SparseCscProblem& problem, const std::vector<double>& alpha,
                         double level);

}  // namespace shapecomp::solver
