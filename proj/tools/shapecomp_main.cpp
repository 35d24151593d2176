#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shapecomp/runner.hpp"

namespace {

using shapecomp::io::Command;
using shapecomp::io::RunConfig;

void add_common(CLI::App* cmd, RunConfig& config, bool needs_image) {
    cmd->add_option("--dict", config.dict_path, "dictionary JSON file")->required();
    cmd->add_option("--out", config.out_dir, "output directory")->required();
    auto* image = cmd->add_option("--image", config.image_path, "input image (PGM)");
    if (needs_image) image->required();
}

void add_measures(CLI::App* cmd, RunConfig& config) {
    auto* uin = cmd->add_option("--uin", config.u_in, "inside reference level");
    auto* uex = cmd->add_option("--uex", config.u_ex, "outside reference level");
    uin->needs(uex);
    uex->needs(uin);
    cmd->add_option("--quantiles", config.quantiles,
                    "histogram quantiles for u_in,u_ex (default 0.15,0.85)")
        ->delimiter(',');
    cmd->add_option("--observed", config.observed_path,
                    "mask PGM of observed pixels (missing pixels elsewhere)");
}

void add_solver(CLI::App* cmd, RunConfig& config) {
    cmd->add_option("--iters", config.solver.max_iters, "subgradient iteration cap");
    cmd->add_option("--seed", config.solver.seed, "run seed (recorded in reports)");
    cmd->add_option("--step-scale", config.solver.step_scale, "step size multiplier");
    cmd->add_flag("--no-polish", [&config](std::int64_t) { config.solver.polish = false; },
                  "skip the exact polish phase");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse convex shape composition toolkit"};
    app.require_subcommand(1);

    RunConfig config;

    auto* segment = app.add_subcommand("segment", "solve one composition problem");
    add_common(segment, config, true);
    add_measures(segment, config);
    add_solver(segment, config);
    auto* tau_opt = segment->add_option("--tau", config.tau, "l1 budget");
    auto* lam_opt = segment->add_option("--lambda", config.lambda, "l1 penalty");
    tau_opt->excludes(lam_opt);

    auto* sweep = app.add_subcommand("sweep", "solve for a list of budgets");
    add_common(sweep, config, true);
    add_measures(sweep, config);
    add_solver(sweep, config);
    sweep->add_option("--tau-list", config.tau_list, "comma-separated budgets")
        ->required()
        ->delimiter(',');

    auto* dsd = app.add_subcommand("dsd", "decompose the dictionary into shapelets");
    add_common(dsd, config, false);

    auto* linkage = app.add_subcommand("linkage", "alpha representative of a composition");
    add_common(linkage, config, false);
    linkage->add_option("--include", config.include, "labels or 1-based indices")
        ->required()
        ->delimiter(',');
    linkage->add_option("--exclude", config.exclude, "labels or 1-based indices")
        ->delimiter(',');

    auto* certify = app.add_subcommand("certify", "recovery conditions and certificate");
    add_common(certify, config, true);
    add_measures(certify, config);
    certify->add_option("--include", config.include, "labels or 1-based indices")
        ->required()
        ->delimiter(',');
    certify->add_option("--exclude", config.exclude, "labels or 1-based indices")
        ->delimiter(',');

    auto* oracle = app.add_subcommand("oracle", "exhaustive cardinal search");
    add_common(oracle, config, true);
    add_measures(oracle, config);
    oracle->add_option("--s", config.sparsity, "cardinality bound")->required();

    CLI11_PARSE(app, argc, argv);

    if (segment->parsed()) {
        config.command = Command::segment;
        if (!config.tau && !config.lambda) {
            std::cerr << "shapecomp: segment needs --tau or --lambda\n";
            return 1;
        }
    } else if (sweep->parsed()) {
        config.command = Command::sweep;
    } else if (dsd->parsed()) {
        config.command = Command::dsd;
    } else if (linkage->parsed()) {
        config.command = Command::linkage;
    } else if (certify->parsed()) {
        config.command = Command::certify;
    } else {
        config.command = Command::oracle;
    }
    return shapecomp::io::run(config);
}
