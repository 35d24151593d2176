#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shapecomp/solver.hpp"

namespace shapecomp::io {

enum class Command { segment, sweep, dsd, linkage, certify, oracle };

struct RunConfig {
    Command command = Command::segment;
    std::string image_path;
    std::string dict_path;
    std::string out_dir;
    std::optional<double> tau;
    std::vector<double> tau_list;
    std::optional<double> lambda;
    std::optional<double> u_in;
    std::optional<double> u_ex;
    std::pair<double, double> quantiles{0.15, 0.85};
    std::optional<std::string> observed_path;
    std::vector<std::string> include;  // labels or 1-based indices
    std::vector<std::string> exclude;
    std::optional<int> sparsity;  // oracle cardinality bound
    solver::SolverConfig solver;
};

// Executes one command, writing artifacts under out_dir.
// Exit status: 0 success, 1 input error, 2 solver non-convergence (artifacts
// are still written).
int run(const RunConfig& config);

}  // namespace shapecomp::io
