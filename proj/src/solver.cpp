#include "shapecomp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "shapecomp/linkage.hpp"
#include "shapecomp/lp.hpp"

namespace shapecomp::solver {

namespace {

constexpr double kSupportDetect = 1e-4;  // fraction of max|alpha| kept for polish
constexpr double kZeroTol = 1e-9;

void validate(const SparseCscProblem& problem) {
    if (problem.dictionary.empty())
        throw std::invalid_argument("solver: empty dictionary");
    for (const auto& s : problem.dictionary)
        if (!(s.grid() == problem.field.grid))
            throw std::invalid_argument("solver: shape grid differs from field grid");
    if (problem.budget < 0.0 || problem.penalty < 0.0)
        throw std::invalid_argument("solver: tau and lambda must be nonnegative");
}

double l1_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

// beta = B alpha on the cell basis.
std::vector<double> cells_beta(const CellBasis& basis, const std::vector<double>& alpha) {
    std::vector<double> beta(basis.cells.shapelets.size(), 0.0);
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        const double a = alpha[j];
        if (a == 0.0) continue;
        for (std::size_t i : basis.cells.index_sets[j]) beta[i] += a;
    }
    return beta;
}

// Subgradient of the separable objective in beta, pushed back through B^T.
std::vector<double> cells_subgradient(const CellBasis& basis,
                                      const std::vector<double>& beta,
                                      std::size_t n_shapes) {
    std::vector<double> z(beta.size());
    for (std::size_t i = 0; i < beta.size(); ++i) {
        if (beta[i] > 1.0)
            z[i] = basis.p[i];
        else if (beta[i] < 0.0)
            z[i] = -basis.q[i];
        else
            z[i] = basis.p[i] - basis.q[i];
    }
    std::vector<double> g(n_shapes, 0.0);
    for (std::size_t j = 0; j < n_shapes; ++j)
        for (std::size_t i : basis.cells.index_sets[j]) g[j] += z[i];
    return g;
}

// Restricted piecewise-linear program on a fixed support and sign pattern,
// solved exactly. In constrained mode the orthant slice of the l1 ball is a
// single linear constraint; in regularized mode the penalty is linear on the
// orthant.
std::optional<std::vector<double>> polish_support(const SparseCscProblem& problem,
                                                  const CellBasis& basis,
                                                  const std::vector<std::size_t>& support,
                                                  const std::vector<double>& signs) {
    if (support.empty()) return std::nullopt;
    const std::size_t n_cells = basis.cells.shapelets.size();

    std::vector<bool> touched(n_cells, false);
    for (std::size_t k = 0; k < support.size(); ++k)
        for (std::size_t i : basis.cells.index_sets[support[k]]) touched[i] = true;

    lp::Problem lpp;
    lpp.maximize = false;
    std::vector<std::size_t> avar(support.size());
    for (std::size_t k = 0; k < support.size(); ++k) {
        const double lam = problem.mode == Mode::regularized ? problem.penalty : 0.0;
        avar[k] = lpp.add_var(0.0, lp::kInf, lam);
    }
    // Auxiliaries: t_i >= max(beta_i, 0) where p_i > 0, s_i >= max(-beta_i, -1)
    // where q_i > 0.
    std::vector<std::size_t> tvar(n_cells, SIZE_MAX), svar(n_cells, SIZE_MAX);
    for (std::size_t i = 0; i < n_cells; ++i) {
        if (!touched[i]) continue;
        if (basis.p[i] > 0.0) tvar[i] = lpp.add_var(0.0, lp::kInf, basis.p[i]);
        if (basis.q[i] > 0.0) svar[i] = lpp.add_var(-1.0, lp::kInf, basis.q[i]);
    }
    for (std::size_t i = 0; i < n_cells; ++i) {
        if (!touched[i]) continue;
        std::vector<double> brow(lpp.num_vars(), 0.0);
        for (std::size_t k = 0; k < support.size(); ++k)
            if (basis.cells.bearing.rows[i][support[k]]) brow[avar[k]] = signs[k];
        if (tvar[i] != SIZE_MAX) {
            std::vector<double> row = brow;
            row[tvar[i]] = -1.0;  // beta_i - t_i <= 0
            lpp.ub_rows.push_back(std::move(row));
            lpp.ub_rhs.push_back(0.0);
        }
        if (svar[i] != SIZE_MAX) {
            std::vector<double> row(lpp.num_vars(), 0.0);
            for (std::size_t k = 0; k < support.size(); ++k)
                if (basis.cells.bearing.rows[i][support[k]]) row[avar[k]] = -signs[k];
            row[svar[i]] = -1.0;  // -beta_i - s_i <= 0
            lpp.ub_rows.push_back(std::move(row));
            lpp.ub_rhs.push_back(0.0);
        }
    }
    if (problem.mode == Mode::constrained) {
        std::vector<double> row(lpp.num_vars(), 0.0);
        for (std::size_t k = 0; k < support.size(); ++k) row[avar[k]] = 1.0;
        lpp.ub_rows.push_back(std::move(row));
        lpp.ub_rhs.push_back(problem.budget);
    }

    const lp::Result res = lp::solve(lpp);
    if (res.status != lp::Status::optimal) return std::nullopt;

    std::vector<double> alpha(problem.dictionary.size(), 0.0);
    for (std::size_t k = 0; k < support.size(); ++k) {
        double v = signs[k] * res.x[avar[k]];
        if (std::abs(v) <= kZeroTol) v = 0.0;
        alpha[support[k]] = v;
    }
    return alpha;
}

Solution run_subgradient(const SparseCscProblem& problem, const SolverConfig& config) {
    validate(problem);
    if (config.max_iters < 1 || config.step_scale <= 0.0)
        throw std::invalid_argument("solver: invalid config");

    const std::size_t n = problem.dictionary.size();
    const CellBasis basis = build_cells(problem.field, problem.dictionary);
    const bool constrained = problem.mode == Mode::constrained;

    const auto penalized = [&](const std::vector<double>& alpha, double g) {
        return constrained ? g : g + problem.penalty * l1_norm(alpha);
    };

    double mass = std::max({std::accumulate(basis.p.begin(), basis.p.end(), 0.0),
                            std::accumulate(basis.q.begin(), basis.q.end(), 0.0), 1e-12});
    const double radius = constrained ? std::max(problem.budget, 1.0) : 1.0;
    const double base_step = config.step_scale * radius / std::sqrt(mass);

    std::vector<double> alpha(n, 0.0);
    std::vector<double> best_alpha = alpha;
    double best_val = penalized(alpha, separable_objective(basis.p, basis.q,
                                                           cells_beta(basis, alpha)));
    const int window = std::max(1, config.max_iters / 10);
    int last_significant = 0;

    Solution out;
    out.converged = false;
    int t = 0;
    if (constrained && problem.budget == 0.0) {
        // Feasible set is the origin.
        out.converged = true;
    } else {
        for (t = 1; t <= config.max_iters; ++t) {
            std::vector<double> beta = cells_beta(basis, alpha);
            std::vector<double> g = cells_subgradient(basis, beta, n);
            if (!constrained && problem.penalty > 0.0)
                for (std::size_t j = 0; j < n; ++j)
                    g[j] += problem.penalty * (alpha[j] > 0.0 ? 1.0 : alpha[j] < 0.0 ? -1.0 : 0.0);

            const double step = base_step / std::sqrt(static_cast<double>(t));
            for (std::size_t j = 0; j < n; ++j) alpha[j] -= step * g[j];
            if (constrained) alpha = project_l1(std::move(alpha), problem.budget);

            const double val = penalized(
                alpha, separable_objective(basis.p, basis.q, cells_beta(basis, alpha)));
            if (val < best_val - config.stop_tol * std::max(1.0, std::abs(best_val))) {
                last_significant = t;
            }
            if (val < best_val) {
                best_val = val;
                best_alpha = alpha;
            }
            if (t - last_significant >= window) {
                out.converged = true;
                break;
            }
        }
    }
    out.iterations_used = std::min(t, config.max_iters);
    out.alpha = best_alpha;

    if (config.polish) {
        double peak = 0.0;
        for (double v : best_alpha) peak = std::max(peak, std::abs(v));
        std::vector<std::size_t> support;
        std::vector<double> signs;
        for (std::size_t j = 0; j < n; ++j)
            if (std::abs(best_alpha[j]) > kSupportDetect * peak && peak > 0.0) {
                support.push_back(j);
                signs.push_back(best_alpha[j] > 0.0 ? 1.0 : -1.0);
            }
        if (auto polished = polish_support(problem, basis, support, signs)) {
            const double val = penalized(
                *polished,
                separable_objective(basis.p, basis.q, cells_beta(basis, *polished)));
            // Prefer the vertex-exact point on ties.
            if (val <= best_val + 1e-9 * std::max(1.0, std::abs(best_val))) {
                out.alpha = *polished;
                best_val = val;
            }
        }
    }

    out.objective = separable_objective(basis.p, basis.q, cells_beta(basis, out.alpha));
    out.support = linkage::active_sets(out.alpha);
    return out;
}

}  // namespace

SparseCscProblem SparseCscProblem::constrained(InhomogeneityField field,
                                               std::vector<ShapeMask> dictionary,
                                               double tau) {
    SparseCscProblem p{std::move(field), std::move(dictionary), Mode::constrained, tau, 0.0};
    validate(p);
    return p;
}

SparseCscProblem SparseCscProblem::regularized(InhomogeneityField field,
                                               std::vector<ShapeMask> dictionary,
                                               double lambda) {
    SparseCscProblem p{std::move(field), std::move(dictionary), Mode::regularized, 0.0,
                       lambda};
    validate(p);
    return p;
}

CellBasis build_cells(const InhomogeneityField& field,
                      const std::vector<ShapeMask>& dictionary) {
    CellBasis basis;
    basis.cells = dsd::decompose(dictionary);
    std::vector<ShapeMask> cell_masks;
    cell_masks.reserve(basis.cells.shapelets.size());
    for (const auto& om : basis.cells.shapelets) cell_masks.emplace_back(om.pixels);
    ShapeIntegrals integrals = shape_integrals(field, cell_masks);
    basis.p = std::move(integrals.P);
    basis.q = std::move(integrals.Q);
    return basis;
}

double objective(const SparseCscProblem& problem, const std::vector<double>& alpha) {
    validate(problem);
    if (alpha.size() != problem.dictionary.size())
        throw std::invalid_argument("objective: alpha length mismatch");
    const std::size_t npix = problem.field.grid.size();
    std::vector<double> level(npix, 0.0);
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        const double a = alpha[j];
        if (a == 0.0) continue;
        problem.dictionary[j].pixels.for_each([&](std::size_t i) { level[i] += a; });
    }
    double total = 0.0;
    for (std::size_t i = 0; i < npix; ++i) {
        const double d = problem.field.diff(i);
        total += std::max(d * level[i], std::min(d, 0.0));
    }
    return total;
}

double separable_objective(const std::vector<double>& p, const std::vector<double>& q,
                           const std::vector<double>& beta) {
    if (p.size() != q.size() || p.size() != beta.size())
        throw std::invalid_argument("separable_objective: length mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < beta.size(); ++i)
        total += p[i] * std::max(beta[i], 0.0) - q[i] * std::min(beta[i], 1.0);
    return total;
}

std::vector<double> subgradient(const SparseCscProblem& problem,
                                const std::vector<double>& alpha) {
    validate(problem);
    if (alpha.size() != problem.dictionary.size())
        throw std::invalid_argument("subgradient: alpha length mismatch");
    const CellBasis basis = build_cells(problem.field, problem.dictionary);
    return cells_subgradient(basis, cells_beta(basis, alpha), alpha.size());
}

std::vector<double> project_l1(std::vector<double> v, double tau) {
    if (tau < 0.0) throw std::invalid_argument("project_l1: tau must be nonnegative");
    double norm = l1_norm(v);
    if (norm <= tau) return v;
    // Soft threshold at the level theta solving sum (|v_i| - theta)^+ = tau.
    std::vector<double> mags(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) mags[i] = std::abs(v[i]);
    std::sort(mags.begin(), mags.end(), std::greater<>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t k = 0; k < mags.size(); ++k) {
        cum += mags[k];
        const double candidate = (cum - tau) / static_cast<double>(k + 1);
        if (k + 1 == mags.size() || mags[k + 1] <= candidate) {
            theta = candidate;
            break;
        }
    }
    for (auto& x : v) {
        const double m = std::abs(x) - theta;
        x = m > 0.0 ? (x > 0.0 ? m : -m) : 0.0;
    }
    return v;
}

Solution solve_constrained(const SparseCscProblem& problem, const SolverConfig& config) {
    if (problem.mode != Mode::constrained)
        throw std::invalid_argument("solve_constrained: problem is in penalty mode");
    return run_subgradient(problem, config);
}

Solution solve_regularized(const SparseCscProblem& problem, const SolverConfig& config) {
    if (problem.mode != Mode::regularized)
        throw std::invalid_argument("solve_regularized: problem is in budget mode");
    return run_subgradient(problem, config);
}

ClosedFormSelection solve_disjoint_closed_form(const ShapeIntegrals& integrals, int s) {
    if (integrals.P.size() != integrals.Q.size())
        throw std::invalid_argument("solve_disjoint_closed_form: P/Q length mismatch");
    if (s < 0) throw std::invalid_argument("solve_disjoint_closed_form: s must be >= 0");
    const std::size_t n = integrals.P.size();
    std::vector<double> diff(n);
    for (std::size_t j = 0; j < n; ++j) diff[j] = integrals.P[j] - integrals.Q[j];

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (diff[static_cast<std::size_t>(a)] != diff[static_cast<std::size_t>(b)])
            return diff[static_cast<std::size_t>(a)] < diff[static_cast<std::size_t>(b)];
        return a < b;
    });

    std::size_t m = 0;
    while (m < n && diff[static_cast<std::size_t>(order[m])] < 0.0) ++m;
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(s), m);

    ClosedFormSelection out;
    out.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(out.indices.begin(), out.indices.end());
    out.unique = !(k >= 1 && k < n &&
                   diff[static_cast<std::size_t>(order[k - 1])] ==
                       diff[static_cast<std::size_t>(order[k])]);
    return out;
}

BruteForceResult brute_force_cardinal_sc(const SparseCscProblem& problem, int s) {
    validate(problem);
    const std::size_t n = problem.dictionary.size();
    if (n > 14)
        throw std::invalid_argument("brute_force_cardinal_sc: dictionary too large (n_s > 14)");
    if (s < 0) throw std::invalid_argument("brute_force_cardinal_sc: s must be >= 0");

    // Subset-union table over bitmasks of the dictionary.
    const std::size_t total = std::size_t{1} << n;
    std::vector<PixelSet> unions(total, PixelSet(problem.field.grid));
    for (std::size_t mask = 1; mask < total; ++mask) {
        const std::size_t low = mask & (~mask + 1);
        const std::size_t j = static_cast<std::size_t>(__builtin_ctzll(mask));
        unions[mask] = unions[mask ^ low];
        unions[mask] |= problem.dictionary[j].pixels;
    }

    std::vector<double> d(problem.field.grid.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = problem.field.diff(i);
    const auto region_value = [&](const PixelSet& region) {
        double v = 0.0;
        region.for_each([&](std::size_t i) { v += d[i]; });
        return v;
    };
    const auto indices_of = [&](std::size_t mask) {
        std::vector<int> out;
        for (std::size_t j = 0; j < n; ++j)
            if (mask & (std::size_t{1} << j)) out.push_back(static_cast<int>(j));
        return out;
    };

    BruteForceResult best;  // the empty selection, value 0
    std::optional<std::pair<std::vector<int>, std::vector<int>>> best_sets;
    for (std::size_t inc = 1; inc < total; ++inc) {
        const int inc_count = std::popcount(inc);
        if (inc_count > s) continue;
        const std::size_t rest = (total - 1) & ~inc;
        // Enumerate submasks of the complement, ascending.
        std::size_t exc = 0;
        for (;;) {
            if (inc_count + std::popcount(exc) <= s) {
                PixelSet region = unions[inc];
                region -= unions[exc];
                const double v = region_value(region);
                if (v < best.value) {
                    best.value = v;
                    best_sets = {indices_of(inc), indices_of(exc)};
                } else if (v == best.value && best_sets) {
                    auto cand = std::make_pair(indices_of(inc), indices_of(exc));
                    if (cand < *best_sets) best_sets = std::move(cand);
                }
            }
            if (exc == rest) break;
            exc = (exc - rest) & rest;  // next submask
        }
    }
    if (best_sets)
        best.spec = dsd::CompositionSpec(best_sets->first, best_sets->second);
    return best;
}

PixelSet extract_support(const SparseCscProblem& problem, const std::vector<double>& alpha,
                         double level) {
    validate(problem);
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("extract_support: level must lie in (0,1)");
    if (alpha.size() != problem.dictionary.size())
        throw std::invalid_argument("extract_support: alpha length mismatch");
    std::vector<double> lvl(problem.field.grid.size(), 0.0);
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        if (alpha[j] == 0.0) continue;
        problem.dictionary[j].pixels.for_each([&](std::size_t i) { lvl[i] += alpha[j]; });
    }
    PixelSet out(problem.field.grid);
    for (std::size_t i = 0; i < lvl.size(); ++i)
        if (lvl[i] > level) out.set(i);
    return out;
}

}  // namespace shapecomp::solver
