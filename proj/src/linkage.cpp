#include "shapecomp/linkage.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "shapecomp/detail/densela.hpp"

namespace shapecomp::linkage {

namespace {

constexpr double kSupportTol = 1e-6;   // alpha support threshold
constexpr double kValueTol = 1e-9;     // beta snapping / strict positivity
constexpr double kRangeTol = 1e-9;     // LP uniqueness probe
constexpr double kRankTol = 1e-10;

struct RestrictedProblem {
    std::vector<ShapeMask> shapes;  // include order then exclude order
    std::size_t n_plus = 0;
    std::size_t n_minus = 0;
    dsd::Decomposition decomposition;
    std::vector<std::size_t> minus_rows;  // shapelets inside some exclude shape
    lp::LinearProgram program;            // variables: alpha on the exclude set
};

RestrictedProblem build_restricted(const std::vector<ShapeMask>& shapes,
                                   const dsd::CompositionSpec& spec) {
    if (!dsd::is_nonredundant(shapes, spec))
        throw std::invalid_argument("linkage: composition is redundant");

    RestrictedProblem rp;
    rp.n_plus = spec.include.size();
    rp.n_minus = spec.exclude.size();
    for (int j : spec.include) rp.shapes.push_back(shapes[static_cast<std::size_t>(j)]);
    for (int j : spec.exclude) rp.shapes.push_back(shapes[static_cast<std::size_t>(j)]);
    rp.decomposition = dsd::decompose(rp.shapes);

    const auto& rows = rp.decomposition.bearing.rows;
    rp.program.objective.assign(rp.n_minus, 1.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        int k_plus = 0;
        std::vector<double> coeff(rp.n_minus, 0.0);
        bool in_minus = false;
        for (std::size_t j = 0; j < rp.n_plus; ++j) k_plus += rows[i][j];
        for (std::size_t j = 0; j < rp.n_minus; ++j)
            if (rows[i][rp.n_plus + j]) {
                coeff[j] = 1.0;
                in_minus = true;
            }
        if (!in_minus) continue;
        rp.minus_rows.push_back(i);
        rp.program.rows.push_back(std::move(coeff));
        rp.program.rhs.push_back(-static_cast<double>(k_plus));
    }
    return rp;
}

// Coordinate range of the optimal face: max/min each variable subject to the
// original constraints plus objective == optimum.
bool maximizer_is_unique(const RestrictedProblem& rp, double optimum) {
    lp::Problem probe;
    probe.objective.assign(rp.n_minus, 0.0);
    probe.lower.assign(rp.n_minus, -lp::kInf);
    probe.upper.assign(rp.n_minus, lp::kInf);
    probe.ub_rows = rp.program.rows;
    probe.ub_rhs = rp.program.rhs;
    probe.eq_rows.push_back(std::vector<double>(rp.n_minus, 1.0));
    probe.eq_rhs.push_back(optimum);

    for (std::size_t k = 0; k < rp.n_minus; ++k) {
        double ends[2];
        for (int dir = 0; dir < 2; ++dir) {
            probe.maximize = dir == 0;
            probe.objective.assign(rp.n_minus, 0.0);
            probe.objective[k] = 1.0;
            const lp::Result r = lp::solve(probe);
            if (r.status != lp::Status::optimal) return false;  // unbounded face
            ends[dir] = r.objective;
        }
        if (ends[0] - ends[1] > kRangeTol) return false;
    }
    return true;
}

}  // namespace

LinkageResult linkage_alpha(const std::vector<ShapeMask>& shapes,
                            const dsd::CompositionSpec& spec) {
    RestrictedProblem rp = build_restricted(shapes, spec);

    LinkageResult out;
    out.shape_order = spec.include;
    out.shape_order.insert(out.shape_order.end(), spec.exclude.begin(), spec.exclude.end());
    out.include_count = rp.n_plus;
    out.alpha.assign(rp.n_plus + rp.n_minus, 1.0);

    if (rp.n_minus == 0) {
        out.unique = true;
    } else {
        const lp::VertexResult lpres = lp::lp_solve(rp.program);
        if (lpres.status != lp::Status::optimal)
            throw std::runtime_error("linkage: exclude-coefficient program failed");
        for (std::size_t j = 0; j < rp.n_minus; ++j)
            out.alpha[rp.n_plus + j] = lpres.point[j];
        out.unique = maximizer_is_unique(rp, lpres.optimum);
    }

    out.beta = rp.decomposition.bearing.apply(out.alpha);
    const auto& rows = rp.decomposition.bearing.rows;
    std::vector<bool> in_minus(rows.size(), false);
    for (std::size_t i : rp.minus_rows) in_minus[i] = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (in_minus[i]) {
            if (std::abs(out.beta[i]) <= kValueTol) {
                out.beta[i] = 0.0;
                out.null_shapelets.push_back(i);
            }
        } else {
            int degree = 0;
            for (std::size_t j = 0; j < rp.n_plus; ++j) degree += rows[i][j];
            if (degree == 1) out.unit_shapelets.push_back(i);
        }
    }
    return out;
}

DiscriminantMatrix discriminant_matrix(const std::vector<ShapeMask>& shapes,
                                       const dsd::CompositionSpec& spec,
                                       const LinkageResult& result) {
    RestrictedProblem rp = build_restricted(shapes, spec);
    DiscriminantMatrix delta;
    for (std::size_t i : result.null_shapelets) {
        if (i >= rp.decomposition.bearing.rows.size())
            throw std::out_of_range("discriminant_matrix: stale linkage result");
        const auto& row = rp.decomposition.bearing.rows[i];
        delta.rows.emplace_back(row.begin() + static_cast<std::ptrdiff_t>(rp.n_plus),
                                row.end());
    }
    return delta;
}

BasicReport is_basic(const std::vector<ShapeMask>& shapes, const dsd::CompositionSpec& spec) {
    const LinkageResult link = linkage_alpha(shapes, spec);
    const DiscriminantMatrix delta = discriminant_matrix(shapes, spec, link);

    BasicReport report;
    report.null_count = link.null_shapelets.size();
    report.exclude_count = spec.exclude.size();
    report.min_w = std::numeric_limits<double>::quiet_NaN();

    std::vector<std::vector<double>> dense;
    for (const auto& row : delta.rows) dense.emplace_back(row.begin(), row.end());
    report.rank = detail::matrix_rank(dense, kRankTol);

    if (report.rank != report.exclude_count || report.null_count != report.exclude_count)
        return report;

    if (report.exclude_count == 0) {
        // Empty discriminant system: vacuously basic.
        report.basic = true;
        return report;
    }

    // Solve Delta^T w = 1; the composition is basic iff w is strictly positive.
    std::vector<std::vector<double>> at(report.exclude_count,
                                        std::vector<double>(report.null_count, 0.0));
    for (std::size_t r = 0; r < report.null_count; ++r)
        for (std::size_t c = 0; c < report.exclude_count; ++c)
            at[c][r] = delta.rows[r][c];
    const auto w = detail::solve_square(at, std::vector<double>(report.exclude_count, 1.0),
                                        kRankTol);
    if (!w) return report;
    report.min_w = (*w)[0];
    for (double v : *w) report.min_w = std::min(report.min_w, v);
    report.basic = report.min_w > kValueTol;
    return report;
}

std::vector<double> indicator_coefficients(const std::vector<ShapeMask>& shapes,
                                           const dsd::CompositionSpec& spec) {
    if (shapes.empty()) throw std::invalid_argument("indicator_coefficients: no shapes");
    const PixelGrid grid = shapes.front().grid();
    std::vector<int> plus_depth(grid.size(), 0);
    for (int j : spec.include)
        shapes[static_cast<std::size_t>(j)].pixels.for_each(
            [&](std::size_t i) { ++plus_depth[i]; });
    int eta = 1;
    for (int d : plus_depth) eta = std::max(eta, d);

    std::vector<double> alpha(spec.include.size() + spec.exclude.size(), 1.0);
    for (std::size_t k = 0; k < spec.exclude.size(); ++k)
        alpha[spec.include.size() + k] = -static_cast<double>(eta);
    return alpha;
}

std::pair<std::vector<int>, std::vector<int>> active_sets(const std::vector<double>& alpha) {
    std::vector<int> plus, minus;
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        if (alpha[j] > kSupportTol) plus.push_back(static_cast<int>(j));
        if (alpha[j] < -kSupportTol) minus.push_back(static_cast<int>(j));
    }
    return {std::move(plus), std::move(minus)};
}

std::vector<double> embed_alpha(const LinkageResult& result, std::size_t dictionary_size) {
    std::vector<double> alpha(dictionary_size, 0.0);
    for (std::size_t k = 0; k < result.shape_order.size(); ++k) {
        const auto j = static_cast<std::size_t>(result.shape_order[k]);
        if (j >= dictionary_size)
            throw std::out_of_range("embed_alpha: dictionary smaller than composition");
        alpha[j] = result.alpha[k];
    }
    return alpha;
}

}  // namespace shapecomp::linkage
