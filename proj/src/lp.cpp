#include "shapecomp/lp.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace shapecomp::lp {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kFeasTol = 1e-7;

// Standard form: min c.y s.t. A y = b, y >= 0, solved by the full-tableau
// two-phase simplex with Bland's anti-cycling rule.
class Simplex {
  public:
    Simplex(std::vector<std::vector<double>> rows, std::vector<double> rhs,
            std::vector<double> cost)
        : a_(std::move(rows)), b_(std::move(rhs)), c_(std::move(cost)),
          m_(a_.size()), n_(c_.size()) {}

    Status run() {
        for (std::size_t i = 0; i < m_; ++i)
            if (b_[i] < 0.0) {
                for (auto& v : a_[i]) v = -v;
                b_[i] = -b_[i];
            }

        // Phase 1: artificial columns form the starting basis.
        basis_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            a_[i].resize(n_ + m_, 0.0);
            a_[i][n_ + i] = 1.0;
            basis_[i] = n_ + i;
        }
        std::vector<double> phase1(n_ + m_, 0.0);
        for (std::size_t j = n_; j < n_ + m_; ++j) phase1[j] = 1.0;
        if (!iterate(phase1, n_ + m_)) return Status::unbounded;  // cannot happen
        if (value(phase1) > kFeasTol) return Status::infeasible;

        drive_out_artificials();

        c_.resize(n_ + m_, 0.0);
        if (!iterate(c_, n_)) return Status::unbounded;
        return Status::optimal;
    }

    std::vector<double> solution() const {
        std::vector<double> y(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] < n_) y[basis_[i]] = b_[i];
        return y;
    }

  private:
    std::vector<std::vector<double>> a_;
    std::vector<double> b_;
    std::vector<double> c_;
    std::size_t m_, n_;
    std::vector<std::size_t> basis_;

    double value(const std::vector<double>& cost) const {
        double v = 0.0;
        for (std::size_t i = 0; i < m_; ++i) v += cost[basis_[i]] * b_[i];
        return v;
    }

    // After phase 1 every artificial is at level zero; pivot it out on any
    // structural column, or delete its row when the row is redundant.
    // Pivoting on a zero-level row preserves feasibility for either pivot
    // sign.
    void drive_out_artificials() {
        for (std::size_t i = 0; i < m_;) {
            if (basis_[i] < n_) {
                ++i;
                continue;
            }
            std::size_t col = n_;
            for (std::size_t j = 0; j < n_; ++j)
                if (std::abs(a_[i][j]) > kPivotTol) {
                    col = j;
                    break;
                }
            if (col < n_) {
                pivot(i, col);
                ++i;
            } else {
                a_.erase(a_.begin() + static_cast<std::ptrdiff_t>(i));
                b_.erase(b_.begin() + static_cast<std::ptrdiff_t>(i));
                basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
                --m_;
            }
        }
    }

    // Runs Bland iterations for the given cost vector; columns >= limit are
    // barred from entering. Returns false on unboundedness.
    bool iterate(const std::vector<double>& cost, std::size_t limit) {
        const std::size_t max_pivots = 2000 + 200 * (m_ + n_);
        for (std::size_t it = 0; it <= max_pivots; ++it) {
            std::size_t enter = limit;
            for (std::size_t j = 0; j < limit; ++j) {
                double r = cost[j];
                for (std::size_t i = 0; i < m_; ++i) r -= cost[basis_[i]] * a_[i][j];
                if (r < -kPivotTol) {
                    enter = j;
                    break;
                }
            }
            if (enter == limit) return true;  // optimal

            std::size_t leave = m_;
            double best_ratio = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                if (a_[i][enter] <= kPivotTol) continue;
                const double ratio = b_[i] / a_[i][enter];
                if (leave == m_ || ratio < best_ratio - kPivotTol ||
                    (std::abs(ratio - best_ratio) <= kPivotTol &&
                     basis_[i] < basis_[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave == m_) return false;  // unbounded direction
            pivot(leave, enter);
        }
        throw std::runtime_error("lp: simplex pivot limit exceeded");
    }

    void pivot(std::size_t row, std::size_t col) {
        const double p = a_[row][col];
        for (auto& v : a_[row]) v /= p;
        b_[row] /= p;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == row) continue;
            const double f = a_[i][col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < a_[i].size(); ++j) a_[i][j] -= f * a_[row][j];
            b_[i] -= f * b_[row];
        }
        basis_[row] = col;
    }
};

void check_dims(const Problem& p) {
    const std::size_t n = p.num_vars();
    if (p.lower.size() != n || p.upper.size() != n)
        throw std::invalid_argument("lp: bound vectors do not match variable count");
    if (p.ub_rows.size() != p.ub_rhs.size() || p.eq_rows.size() != p.eq_rhs.size())
        throw std::invalid_argument("lp: row/rhs count mismatch");
    for (const auto& r : p.ub_rows)
        if (r.size() != n) throw std::invalid_argument("lp: bad ub row width");
    for (const auto& r : p.eq_rows)
        if (r.size() != n) throw std::invalid_argument("lp: bad eq row width");
    for (double v : p.objective)
        if (std::isnan(v)) throw std::invalid_argument("lp: NaN in objective");
}

}  // namespace

Result solve(const Problem& problem) {
    check_dims(problem);
    const std::size_t n = problem.num_vars();

    // Map every variable onto nonnegative standard-form columns: a finite
    // lower bound becomes a shift, a free variable splits in two, and finite
    // upper bounds turn into extra <= rows.
    struct VarMap {
        double offset = 0.0;
        std::size_t pos = 0;
        std::size_t neg = SIZE_MAX;
    };
    std::vector<VarMap> vmap(n);
    std::size_t cols = 0;
    for (std::size_t j = 0; j < n; ++j) {
        if (std::isfinite(problem.lower[j])) {
            vmap[j] = {problem.lower[j], cols++, SIZE_MAX};
        } else {
            vmap[j].pos = cols++;
            vmap[j].neg = cols++;
        }
    }

    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    std::vector<bool> is_eq;
    auto add_row = [&](const std::vector<double>& dense, double b, bool eq) {
        std::vector<double> r(cols, 0.0);
        double shift = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double v = dense[j];
            if (v == 0.0) continue;
            r[vmap[j].pos] += v;
            if (vmap[j].neg != SIZE_MAX) r[vmap[j].neg] -= v;
            shift += v * vmap[j].offset;
        }
        rows.push_back(std::move(r));
        rhs.push_back(b - shift);
        is_eq.push_back(eq);
    };
    for (std::size_t i = 0; i < problem.ub_rows.size(); ++i)
        add_row(problem.ub_rows[i], problem.ub_rhs[i], false);
    for (std::size_t i = 0; i < problem.eq_rows.size(); ++i)
        add_row(problem.eq_rows[i], problem.eq_rhs[i], true);
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(problem.upper[j])) continue;
        std::vector<double> unit(n, 0.0);
        unit[j] = 1.0;
        add_row(unit, problem.upper[j], false);
    }

    // Slack per inequality row, then the simplex core.
    std::size_t slacks = 0;
    for (bool eq : is_eq)
        if (!eq) ++slacks;
    std::vector<double> cost(cols + slacks, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double sign = problem.maximize ? -1.0 : 1.0;
        cost[vmap[j].pos] += sign * problem.objective[j];
        if (vmap[j].neg != SIZE_MAX) cost[vmap[j].neg] -= sign * problem.objective[j];
    }
    std::size_t next_slack = cols;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].resize(cols + slacks, 0.0);
        if (!is_eq[i]) rows[i][next_slack++] = 1.0;
    }

    Simplex core(std::move(rows), std::move(rhs), std::move(cost));
    Result out;
    out.status = core.run();
    if (out.status != Status::optimal) return out;

    const std::vector<double> y = core.solution();
    out.x.resize(n);
    out.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double v = vmap[j].offset + y[vmap[j].pos];
        if (vmap[j].neg != SIZE_MAX) v -= y[vmap[j].neg];
        out.x[j] = v;
        out.objective += problem.objective[j] * v;
    }
    return out;
}

VertexResult lp_solve(const LinearProgram& lp) {
    Problem p;
    p.maximize = true;
    p.objective = lp.objective;
    p.ub_rows = lp.rows;
    p.ub_rhs = lp.rhs;
    p.lower.assign(lp.objective.size(), -kInf);
    p.upper.assign(lp.objective.size(), kInf);

    const Result res = solve(p);
    VertexResult out;
    out.status = res.status;
    if (res.status != Status::optimal) return out;
    out.optimum = res.objective;
    out.point = res.x;
    for (std::size_t i = 0; i < lp.rows.size(); ++i) {
        double ax = 0.0;
        for (std::size_t j = 0; j < lp.objective.size(); ++j)
            ax += lp.rows[i][j] * res.x[j];
        if (std::abs(ax - lp.rhs[i]) <= kFeasTol) out.active_rows.push_back(i);
    }
    return out;
}

}  // namespace shapecomp::lp
