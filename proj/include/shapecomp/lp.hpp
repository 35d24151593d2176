#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace shapecomp::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Status { optimal, unbounded, infeasible };

// maximize objective . x  subject to  rows x <= rhs,  x free.
struct LinearProgram {
    std::vector<double> objective;
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
};

struct VertexResult {
    Status status = Status::infeasible;
    double optimum = 0.0;
    std::vector<double> point;
    std::vector<std::size_t> active_rows;  // constraints tight at the vertex
};

// Dense two-phase simplex under Bland's pivot rule; deterministic.
VertexResult lp_solve(const LinearProgram& lp);

// General sense/bounds/equality form used by the solver polish and the
// certificate search. Bounds may be +-inf.
struct Problem {
    bool maximize = false;
    std::vector<double> objective;
    std::vector<std::vector<double>> ub_rows;
    std::vector<double> ub_rhs;
    std::vector<std::vector<double>> eq_rows;
    std::vector<double> eq_rhs;
    std::vector<double> lower;
    std::vector<double> upper;

    // Appends a variable and returns its index.
    std::size_t add_var(double lo, double hi, double cost) {
        lower.push_back(lo);
        upper.push_back(hi);
        objective.push_back(cost);
        return objective.size() - 1;
    }
    std::size_t num_vars() const { return objective.size(); }
};

struct Result {
    Status status = Status::infeasible;
    double objective = 0.0;
    std::vector<double> x;
};

Result solve(const Problem& problem);

}  // namespace shapecomp::lp
