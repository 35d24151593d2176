#include "shapecomp/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "shapecomp/detail/densela.hpp"
#include "shapecomp/linkage.hpp"
#include "shapecomp/lp.hpp"

namespace shapecomp::certify {

namespace {

constexpr double kSnapTol = 1e-9;
constexpr double kMarginTol = 1e-9;
constexpr double kRankTol = 1e-10;
constexpr double kCoherenceTol = 1e-9;

}  // namespace

std::vector<std::size_t> SupportPartition::off_support() const {
    std::vector<std::size_t> out = gamma_0;
    out.insert(out.end(), gamma_1.begin(), gamma_1.end());
    std::sort(out.begin(), out.end());
    return out;
}

SupportPartition partition_beta(const std::vector<double>& beta) {
    SupportPartition part;
    part.cell_count = beta.size();
    for (std::size_t i = 0; i < beta.size(); ++i) {
        const double b = beta[i];
        if (std::abs(b) <= kSnapTol)
            part.gamma_0.push_back(i);
        else if (std::abs(b - 1.0) <= kSnapTol)
            part.gamma_1.push_back(i);
        else if (b < 0.0)
            part.gamma_0minus.push_back(i);
        else if (b > 1.0)
            part.gamma_1plus.push_back(i);
        else
            throw std::invalid_argument(
                "partition_beta: beta entry strictly inside (0,1); the optimality "
                "conditions do not apply");
    }
    return part;
}

BoundingVectors bounding_vectors(const std::vector<double>& p, const std::vector<double>& q,
                                 const SupportPartition& partition) {
    if (p.size() != partition.cell_count || q.size() != partition.cell_count)
        throw std::invalid_argument("bounding_vectors: p/q length mismatch");
    BoundingVectors out;
    out.cells = partition.off_support();
    std::vector<bool> is_zero(partition.cell_count, false);
    for (std::size_t i : partition.gamma_0) is_zero[i] = true;
    for (std::size_t cell : out.cells) {
        if (is_zero[cell]) {
            out.l.push_back(q[cell] - p[cell]);
            out.u.push_back(q[cell]);
        } else {
            out.l.push_back(-p[cell]);
            out.u.push_back(q[cell] - p[cell]);
        }
    }
    return out;
}

std::vector<double> loc_violation(const std::vector<double>& p, const std::vector<double>& q,
                                  const std::vector<std::vector<std::size_t>>& shape_index_sets,
                                  const SupportPartition& partition) {
    if (p.size() != partition.cell_count || q.size() != partition.cell_count)
        throw std::invalid_argument("loc_violation: p/q length mismatch");
    std::vector<bool> plus(partition.cell_count, false), minus(partition.cell_count, false);
    for (std::size_t i : partition.gamma_1plus) plus[i] = true;
    for (std::size_t i : partition.gamma_0minus) minus[i] = true;

    std::vector<double> e(shape_index_sets.size(), 0.0);
    for (std::size_t j = 0; j < shape_index_sets.size(); ++j)
        for (std::size_t cell : shape_index_sets[j]) {
            if (cell >= partition.cell_count)
                throw std::out_of_range("loc_violation: cell index out of range");
            if (plus[cell]) e[j] += p[cell];
            if (minus[cell]) e[j] -= q[cell];
        }
    return e;
}

Certificate find_certificate(const dsd::BearingMatrix& bearing, const std::vector<double>& c,
                             const std::vector<double>& e, const BoundingVectors& bounds,
                             const SupportPartition& partition) {
    const std::size_t n_s = bearing.shape_count;
    if (c.size() != n_s || e.size() != n_s)
        throw std::invalid_argument("find_certificate: c/e length mismatch");
    if (bearing.num_rows() != partition.cell_count)
        throw std::invalid_argument("find_certificate: bearing row count mismatch");
    for (double v : c)
        if (!std::isnan(v) && std::abs(v) > 1.0 + kSnapTol)
            throw std::invalid_argument("find_certificate: |c_j| must be <= 1");

    const std::vector<std::size_t>& off = bounds.cells;
    const std::size_t n_off = off.size();
    std::vector<std::size_t> free_rows;
    for (std::size_t j = 0; j < n_s; ++j)
        if (std::isnan(c[j])) free_rows.push_back(j);

    Certificate best;
    best.status = CertificateStatus::infeasible;
    bool found = false;

    // eta_c c_j is bilinear when c_j is free; substituting zeta_j = eta_c c_j
    // keeps the system linear once the sign of eta_c is fixed, so each sign
    // branch is one LP.
    for (int branch = 0; branch < 2; ++branch) {
        const bool nonneg = branch == 0;
        lp::Problem lpp;
        lpp.maximize = true;
        std::vector<std::size_t> eta_var(n_off);
        for (std::size_t m = 0; m < n_off; ++m) eta_var[m] = lpp.add_var(-lp::kInf, lp::kInf, 0.0);
        const std::size_t etac_var =
            nonneg ? lpp.add_var(0.0, lp::kInf, 0.0) : lpp.add_var(-lp::kInf, 0.0, 0.0);
        std::vector<std::size_t> zeta_var(free_rows.size());
        for (std::size_t k = 0; k < free_rows.size(); ++k)
            zeta_var[k] = lpp.add_var(-lp::kInf, lp::kInf, 0.0);
        const std::size_t t_var = lpp.add_var(-lp::kInf, lp::kInf, 1.0);

        for (std::size_t j = 0, k = 0; j < n_s; ++j) {
            std::vector<double> row(lpp.num_vars(), 0.0);
            for (std::size_t m = 0; m < n_off; ++m)
                if (bearing.rows[off[m]][j]) row[eta_var[m]] = 1.0;
            if (std::isnan(c[j]))
                row[zeta_var[k++]] = 1.0;
            else
                row[etac_var] = c[j];
            lpp.eq_rows.push_back(std::move(row));
            lpp.eq_rhs.push_back(e[j]);
        }
        for (std::size_t m = 0; m < n_off; ++m) {
            std::vector<double> lo(lpp.num_vars(), 0.0), hi(lpp.num_vars(), 0.0);
            lo[eta_var[m]] = -1.0;
            lo[t_var] = 1.0;  // t - eta_m <= -l_m
            lpp.ub_rows.push_back(std::move(lo));
            lpp.ub_rhs.push_back(-bounds.l[m]);
            hi[eta_var[m]] = 1.0;
            hi[t_var] = 1.0;  // eta_m + t <= u_m
            lpp.ub_rows.push_back(std::move(hi));
            lpp.ub_rhs.push_back(bounds.u[m]);
        }
        // |zeta| <= |eta_c| on the fixed sign branch.
        for (std::size_t k = 0; k < free_rows.size(); ++k) {
            std::vector<double> r1(lpp.num_vars(), 0.0), r2(lpp.num_vars(), 0.0);
            const double s = nonneg ? 1.0 : -1.0;
            r1[zeta_var[k]] = 1.0;
            r1[etac_var] = -s;
            lpp.ub_rows.push_back(std::move(r1));
            lpp.ub_rhs.push_back(0.0);
            r2[zeta_var[k]] = -1.0;
            r2[etac_var] = -s;
            lpp.ub_rows.push_back(std::move(r2));
            lpp.ub_rhs.push_back(0.0);
        }
        if (n_off == 0) {
            // No bound rows cap t; decide by feasibility at t = 0.
            std::vector<double> row(lpp.num_vars(), 0.0);
            row[t_var] = 1.0;
            lpp.ub_rows.push_back(std::move(row));
            lpp.ub_rhs.push_back(0.0);
        }

        const lp::Result res = lp::solve(lpp);
        if (res.status != lp::Status::optimal) continue;
        if (found && res.objective <= best.margin) continue;
        found = true;
        best.margin = res.objective;
        best.eta_c = res.x[etac_var];
        best.eta.resize(n_off);
        for (std::size_t m = 0; m < n_off; ++m) best.eta[m] = res.x[eta_var[m]];
        best.c = c;
        for (std::size_t k = 0; k < free_rows.size(); ++k) {
            const double zeta = res.x[zeta_var[k]];
            best.c[free_rows[k]] = std::abs(best.eta_c) > kSnapTol ? zeta / best.eta_c : 0.0;
        }
    }

    if (!found) return best;  // equality system unsolvable on both branches

    // Uniqueness needs [(B_off)^T, c] with full row rank, evaluated on the
    // realized sign vector.
    std::vector<std::vector<double>> stacked(n_s, std::vector<double>(n_off + 1, 0.0));
    for (std::size_t j = 0; j < n_s; ++j) {
        for (std::size_t m = 0; m < n_off; ++m)
            stacked[j][m] = bearing.rows[off[m]][j] ? 1.0 : 0.0;
        stacked[j][n_off] = best.c[j];
    }
    if (detail::matrix_rank(stacked, kRankTol) != n_s) {
        best.status = CertificateStatus::rank_deficient;
        best.feasible = false;
        return best;
    }
    best.feasible = best.margin > kMarginTol;
    best.status = best.feasible ? CertificateStatus::feasible : CertificateStatus::infeasible;
    return best;
}

TangentWitness tangent_witness_loc(const solver::SparseCscProblem& problem,
                                   const dsd::CompositionSpec& spec,
                                   const std::vector<double>& alpha_star) {
    const PixelSet region = dsd::compose_region(problem.dictionary, spec);
    if (region.empty() || !loc_holds(problem.field, ShapeMask(region)).holds)
        throw std::invalid_argument("tangent_witness_loc: LOC fails for the composed region");
    if (alpha_star.size() != problem.dictionary.size())
        throw std::invalid_argument("tangent_witness_loc: alpha length mismatch");

    std::vector<bool> in_comp(problem.dictionary.size(), false);
    for (int j : spec.include) in_comp[static_cast<std::size_t>(j)] = true;
    for (int j : spec.exclude) in_comp[static_cast<std::size_t>(j)] = true;
    std::size_t n_ext = 0;
    for (bool b : in_comp)
        if (!b) ++n_ext;

    const double g_star = solver::objective(problem, alpha_star);
    const double tau = [&] {
        double s = 0.0;
        for (double v : alpha_star) s += std::abs(v);
        return s;
    }();

    TangentWitness out;
    double eps = 1e-3, k = 2.0;
    for (int round = 0; round < 40; ++round, eps *= 0.5, k *= 2.0) {
        std::vector<double> hat(alpha_star.size());
        for (std::size_t j = 0; j < hat.size(); ++j)
            hat[j] = in_comp[j] ? k * alpha_star[j] : -eps;
        const double gain = (k - 1.0) * tau - eps * static_cast<double>(n_ext);
        if (gain <= 0.0) continue;
        if (std::abs(solver::objective(problem, hat) - g_star) <= 1e-8) {
            out.found = true;
            out.alpha_hat = std::move(hat);
            out.epsilon = eps;
            out.k = k;
            return out;
        }
    }
    return out;
}

BearingConstants bearing_constants(const dsd::BearingMatrix& restricted_bearing,
                                   const std::vector<std::size_t>& unit_set,
                                   const std::vector<std::size_t>& null_set,
                                   const std::vector<double>& c) {
    const std::size_t n_cols = restricted_bearing.shape_count;
    if (c.size() != n_cols)
        throw std::invalid_argument("bearing_constants: c length mismatch");

    BearingConstants out;
    out.rows = unit_set;
    out.rows.insert(out.rows.end(), null_set.begin(), null_set.end());
    std::sort(out.rows.begin(), out.rows.end());
    if (out.rows.size() != n_cols)
        throw std::runtime_error(
            "bearing_constants: unit/null shapelet count differs from shape count; "
            "composition is not basic");

    std::vector<std::vector<double>> at(n_cols, std::vector<double>(n_cols, 0.0));
    for (std::size_t r = 0; r < out.rows.size(); ++r)
        for (std::size_t j = 0; j < n_cols; ++j)
            at[j][r] = restricted_bearing.rows[out.rows[r]][j] ? 1.0 : 0.0;
    std::vector<double> rhs(n_cols);
    for (std::size_t j = 0; j < n_cols; ++j) rhs[j] = -c[j];
    const auto w = detail::solve_square(at, rhs, kRankTol);
    if (!w)
        throw std::runtime_error("bearing_constants: singular system; composition is not basic");
    out.w = *w;

    std::vector<bool> is_unit(restricted_bearing.num_rows(), false);
    for (std::size_t i : unit_set) is_unit[i] = true;
    const double n_minus = static_cast<double>(null_set.size());
    out.bounds_ok = true;
    for (std::size_t r = 0; r < out.rows.size(); ++r) {
        const double v = out.w[r];
        if (is_unit[out.rows[r]]) {
            if (v < -(1.0 + n_minus) - kSnapTol || v > -1.0 + kSnapTol) out.bounds_ok = false;
        } else {
            if (v <= kSnapTol || v > 1.0 + kSnapTol) out.bounds_ok = false;
        }
    }
    return out;
}

std::vector<double> geometric_coherence(const dsd::Decomposition& cells,
                                        const std::vector<dsd::Shapelet>& composition_shapelets,
                                        const std::vector<int>& exterior_columns,
                                        const std::vector<double>& w) {
    if (composition_shapelets.size() != w.size())
        throw std::invalid_argument("geometric_coherence: w length mismatch");

    // gamma[l][j]: relative number of cells of shapelet l inside exterior j.
    std::vector<double> coherence(exterior_columns.size(), 0.0);
    for (std::size_t l = 0; l < composition_shapelets.size(); ++l) {
        const PixelSet& shapelet = composition_shapelets[l].pixels;
        std::size_t cell_count = 0;
        std::vector<std::size_t> inside_count(exterior_columns.size(), 0);
        for (std::size_t i = 0; i < cells.shapelets.size(); ++i) {
            const PixelSet& cell = cells.shapelets[i].pixels;
            if (!shapelet.intersects(cell)) continue;
            if (!shapelet.contains(cell))
                throw std::invalid_argument(
                    "geometric_coherence: cells do not refine the composition shapelets");
            ++cell_count;
            for (std::size_t jx = 0; jx < exterior_columns.size(); ++jx)
                if (cells.bearing.rows[i][static_cast<std::size_t>(exterior_columns[jx])])
                    ++inside_count[jx];
        }
        if (cell_count == 0)
            throw std::invalid_argument("geometric_coherence: shapelet contains no cell");
        for (std::size_t jx = 0; jx < exterior_columns.size(); ++jx)
            coherence[jx] += w[l] * static_cast<double>(inside_count[jx]) /
                             static_cast<double>(cell_count);
    }
    for (auto& v : coherence) v = std::abs(v);
    return coherence;
}

RecoveryReport verify_recovery_conditions(const std::vector<ShapeMask>& dictionary,
                                          const dsd::CompositionSpec& spec) {
    const linkage::BasicReport basic = linkage::is_basic(dictionary, spec);
    if (!basic.basic)
        throw std::invalid_argument("verify_recovery_conditions: composition is not basic");
    const linkage::LinkageResult link = linkage::linkage_alpha(dictionary, spec);

    std::vector<ShapeMask> comp_shapes;
    for (int j : link.shape_order) comp_shapes.push_back(dictionary[static_cast<std::size_t>(j)]);
    const dsd::Decomposition restricted = dsd::decompose(comp_shapes);
    const dsd::Decomposition cells = dsd::decompose(dictionary);

    RecoveryReport report;
    std::vector<bool> in_comp(dictionary.size(), false);
    for (int j : link.shape_order) in_comp[static_cast<std::size_t>(j)] = true;
    for (std::size_t j = 0; j < dictionary.size(); ++j)
        if (!in_comp[j]) report.exterior.push_back(static_cast<int>(j));

    std::vector<double> c(link.shape_order.size());
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = k < link.include_count ? 1.0 : -1.0;
    report.constants = bearing_constants(restricted.bearing, link.unit_shapelets,
                                         link.null_shapelets, c);

    // Off-support cells: cells inside unit or null shapelets, plus cells
    // outside the composition union entirely.
    PixelSet comp_union(dictionary.front().grid());
    for (const auto& s : comp_shapes) comp_union |= s.pixels;
    std::vector<bool> keep_shapelet(restricted.shapelets.size(), false);
    for (std::size_t i : report.constants.rows) keep_shapelet[i] = true;

    std::vector<std::size_t> off_cells;
    for (std::size_t i = 0; i < cells.shapelets.size(); ++i) {
        const PixelSet& cell = cells.shapelets[i].pixels;
        if (!cell.intersects(comp_union)) {
            off_cells.push_back(i);
            continue;
        }
        for (std::size_t l = 0; l < restricted.shapelets.size(); ++l) {
            if (!keep_shapelet[l]) continue;
            if (restricted.shapelets[l].pixels.contains(cell)) {
                off_cells.push_back(i);
                break;
            }
        }
    }

    report.exempt.resize(report.exterior.size());
    for (std::size_t jx = 0; jx < report.exterior.size(); ++jx)
        report.exempt[jx] =
            !dictionary[static_cast<std::size_t>(report.exterior[jx])].pixels.intersects(
                comp_union);

    std::vector<std::vector<double>> stack;
    for (int j : link.shape_order) {
        std::vector<double> row(off_cells.size());
        for (std::size_t m = 0; m < off_cells.size(); ++m)
            row[m] = cells.bearing.rows[off_cells[m]][static_cast<std::size_t>(j)] ? 1.0 : 0.0;
        stack.push_back(std::move(row));
    }
    for (std::size_t jx = 0; jx < report.exterior.size(); ++jx) {
        if (report.exempt[jx]) continue;
        std::vector<double> row(off_cells.size());
        for (std::size_t m = 0; m < off_cells.size(); ++m)
            row[m] = cells.bearing.rows[off_cells[m]]
                                       [static_cast<std::size_t>(report.exterior[jx])]
                         ? 1.0
                         : 0.0;
        stack.push_back(std::move(row));
    }
    report.row_rank_ok = detail::matrix_rank(stack, kRankTol) == stack.size();

    std::vector<dsd::Shapelet> selected;
    for (std::size_t i : report.constants.rows) selected.push_back(restricted.shapelets[i]);
    report.coherence =
        geometric_coherence(cells, selected, report.exterior, report.constants.w);

    report.verdict = report.row_rank_ok;
    for (double cj : report.coherence)
        if (!(cj < 1.0 - kCoherenceTol)) report.verdict = false;
    return report;
}

}  // namespace shapecomp::certify
