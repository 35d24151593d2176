#include "shapecomp/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "shapecomp/certify.hpp"
#include "shapecomp/dictionary.hpp"
#include "shapecomp/linkage.hpp"
#include "shapecomp/pgm.hpp"

namespace shapecomp::io {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct LoadedInputs {
    DictionarySpec spec;
    std::vector<ShapeMask> shapes;
    std::optional<Image> image;
    std::optional<InhomogeneityField> field;
    double u_in = 0, u_ex = 0;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

LoadedInputs load_inputs(const RunConfig& config, bool needs_image) {
    LoadedInputs in;
    const fs::path dict_path(config.dict_path);
    in.spec = parse_dictionary(read_file(config.dict_path),
                               dict_path.has_parent_path() ? dict_path.parent_path().string()
                                                           : std::string("."));
    in.shapes = rasterize_all(in.spec, dict_path.has_parent_path()
                                           ? dict_path.parent_path().string()
                                           : std::string("."));
    if (!needs_image) return in;

    Image img = read_pgm(config.image_path);
    if (!(img.grid == in.spec.grid))
        throw std::runtime_error("image grid does not match the dictionary grid");
    if (config.observed_path) {
        PixelSet obs = read_pgm_mask(*config.observed_path);
        img = Image(img.grid, img.values, std::move(obs));
    }
    if (config.u_in && config.u_ex) {
        in.u_in = *config.u_in;
        in.u_ex = *config.u_ex;
    } else {
        std::tie(in.u_in, in.u_ex) =
            quantile_levels(img, config.quantiles.first, config.quantiles.second);
    }
    in.field = chan_vese_measures(img, in.u_in, in.u_ex);
    in.image = std::move(img);
    return in;
}

// Accepts an entry label or a 1-based index.
int resolve_entry(const DictionarySpec& spec, const std::string& token) {
    for (std::size_t j = 0; j < spec.entries.size(); ++j)
        if (spec.entries[j].label == token) return static_cast<int>(j);
    try {
        const int idx = std::stoi(token);
        if (idx >= 1 && idx <= static_cast<int>(spec.entries.size())) return idx - 1;
    } catch (const std::exception&) {
    }
    throw std::runtime_error("unknown dictionary entry '" + token + "'");
}

dsd::CompositionSpec resolve_spec(const DictionarySpec& spec, const RunConfig& config) {
    std::vector<int> inc, exc;
    for (const auto& t : config.include) inc.push_back(resolve_entry(spec, t));
    for (const auto& t : config.exclude) exc.push_back(resolve_entry(spec, t));
    return dsd::CompositionSpec(std::move(inc), std::move(exc));
}

void write_alpha_csv(const fs::path& path, const DictionarySpec& spec,
                     const std::vector<double>& alpha) {
    std::ofstream out(path);
    out << "index,label,alpha\n";
    for (std::size_t j = 0; j < alpha.size(); ++j)
        out << (j + 1) << "," << spec.entries[j].label << "," << fmt(alpha[j]) << "\n";
}

void write_support_lists(std::ostream& out, const DictionarySpec& spec,
                         const std::pair<std::vector<int>, std::vector<int>>& support) {
    out << "support+:";
    for (int j : support.first) out << " " << spec.entries[static_cast<std::size_t>(j)].label;
    out << "\nsupport-:";
    for (int j : support.second) out << " " << spec.entries[static_cast<std::size_t>(j)].label;
    out << "\n";
}

solver::Solution solve_one(const LoadedInputs& in, const RunConfig& config, double tau) {
    const auto problem = config.lambda
                             ? solver::SparseCscProblem::regularized(*in.field, in.shapes,
                                                                     *config.lambda)
                             : solver::SparseCscProblem::constrained(*in.field, in.shapes, tau);
    return config.lambda ? solver::solve_regularized(problem, config.solver)
                         : solver::solve_constrained(problem, config.solver);
}

void write_solution(const fs::path& dir, const std::string& stem, const LoadedInputs& in,
                    const solver::Solution& sol) {
    write_alpha_csv(dir / (stem + ".csv"), in.spec, sol.alpha);
    const auto problem =
        solver::SparseCscProblem::constrained(*in.field, in.shapes, 0.0);
    write_pgm_mask((dir / (stem + ".pgm")).string(),
                   solver::extract_support(problem, sol.alpha, 0.5));
}

int run_segment(const RunConfig& config) {
    LoadedInputs in = load_inputs(config, true);
    const double tau = config.tau.value_or(0.0);
    const solver::Solution sol = solve_one(in, config, tau);

    const fs::path dir(config.out_dir);
    write_solution(dir, "alpha", in, sol);
    std::ofstream rep(dir / "report.txt");
    rep << "command: segment\n";
    rep << (config.lambda ? "lambda: " + fmt(*config.lambda) : "tau: " + fmt(tau)) << "\n";
    rep << "u_in: " << fmt(in.u_in) << "\nu_ex: " << fmt(in.u_ex) << "\n";
    rep << "objective: " << fmt(sol.objective) << "\n";
    rep << "iterations: " << sol.iterations_used << "\n";
    rep << "converged: " << (sol.converged ? "yes" : "no") << "\n";
    rep << "seed: " << config.solver.seed << "\n";
    write_support_lists(rep, in.spec, sol.support);
    return sol.converged ? 0 : 2;
}

int run_sweep(const RunConfig& config) {
    LoadedInputs in = load_inputs(config, true);
    const fs::path dir(config.out_dir);
    std::ofstream summary(dir / "summary.txt");
    summary << "tau objective support_size converged\n";
    bool all_converged = true;
    for (double tau : config.tau_list) {
        RunConfig one = config;
        one.lambda.reset();
        const solver::Solution sol = solve_one(in, one, tau);
        char stem[48];
        std::snprintf(stem, sizeof stem, "alpha_tau_%g", tau);
        write_solution(dir, stem, in, sol);
        summary << fmt(tau) << " " << fmt(sol.objective) << " "
                << sol.support.first.size() + sol.support.second.size() << " "
                << (sol.converged ? "yes" : "no") << "\n";
        all_converged = all_converged && sol.converged;
    }
    return all_converged ? 0 : 2;
}

int run_dsd(const RunConfig& config) {
    LoadedInputs in = load_inputs(config, false);
    const dsd::Decomposition dec = dsd::decompose(in.shapes);
    const fs::path dir(config.out_dir);
    std::ofstream(dir / "bearing.txt") << dec.bearing.to_text();
    std::ofstream rep(dir / "report.txt");
    rep << "command: dsd\nshapes: " << in.shapes.size()
        << "\nshapelets: " << dec.shapelets.size() << "\n";
    for (std::size_t j = 0; j < dec.index_sets.size(); ++j) {
        rep << "I_" << (j + 1) << " (" << in.spec.entries[j].label << "):";
        for (std::size_t i : dec.index_sets[j]) rep << " " << (i + 1);
        rep << "\n";
    }
    const dsd::PartitionReport check =
        dsd::verify_partition_properties(in.shapes, dec.shapelets, dec.index_sets);
    rep << "partition_check: " << (check.all_pass() ? "pass" : "FAIL") << "\n";
    return 0;
}

int run_linkage(const RunConfig& config) {
    LoadedInputs in = load_inputs(config, false);
    const dsd::CompositionSpec spec = resolve_spec(in.spec, config);
    const linkage::LinkageResult link = linkage::linkage_alpha(in.shapes, spec);
    const linkage::BasicReport basic = linkage::is_basic(in.shapes, spec);

    const fs::path dir(config.out_dir);
    std::ofstream rep(dir / "report.txt");
    rep << "command: linkage\n";
    rep << "alpha:";
    for (std::size_t k = 0; k < link.alpha.size(); ++k)
        rep << " " << in.spec.entries[static_cast<std::size_t>(link.shape_order[k])].label
            << "=" << fmt(link.alpha[k]);
    rep << "\nbeta:";
    for (double b : link.beta) rep << " " << fmt(b);
    rep << "\nunit_shapelets:";
    for (std::size_t i : link.unit_shapelets) rep << " " << (i + 1);
    rep << "\nnull_shapelets:";
    for (std::size_t i : link.null_shapelets) rep << " " << (i + 1);
    rep << "\nunique: " << (link.unique ? "yes" : "no") << "\n";
    rep << "basic: " << (basic.basic ? "yes" : "no") << " (rank " << basic.rank << ", null "
        << basic.null_count << ", exclude " << basic.exclude_count << ", min_w "
        << fmt(basic.min_w) << ")\n";
    return 0;
}

int run_certify(const RunConfig& config) {
    LoadedInputs in = load_inputs(config, true);
    const dsd::CompositionSpec spec = resolve_spec(in.spec, config);
    const fs::path dir(config.out_dir);
    std::ofstream rep(dir / "report.txt");
    rep << "command: certify\n";

    const linkage::BasicReport basic = linkage::is_basic(in.shapes, spec);
    rep << "basic: " << (basic.basic ? "yes" : "no") << "\n";
    if (!basic.basic) {
        rep << "verdict: no (composition is not basic)\n";
        return 0;
    }
    const certify::RecoveryReport recovery =
        certify::verify_recovery_conditions(in.shapes, spec);
    rep << "row_rank_ok: " << (recovery.row_rank_ok ? "yes" : "no") << "\n";
    rep << "coherence:";
    for (std::size_t k = 0; k < recovery.exterior.size(); ++k)
        rep << " "
            << in.spec.entries[static_cast<std::size_t>(recovery.exterior[k])].label << "="
            << fmt(recovery.coherence[k]) << (recovery.exempt[k] ? "(exempt)" : "");
    rep << "\nrecovery_verdict: " << (recovery.verdict ? "yes" : "no") << "\n";

    // Optimality certificate for the embedded linkage vector.
    const linkage::LinkageResult link = linkage::linkage_alpha(in.shapes, spec);
    const std::vector<double> alpha = linkage::embed_alpha(link, in.shapes.size());
    const solver::CellBasis basis = solver::build_cells(*in.field, in.shapes);
    const std::vector<double> beta = basis.cells.bearing.apply(alpha);
    try {
        const certify::SupportPartition part = certify::partition_beta(beta);
        const certify::BoundingVectors bounds =
            certify::bounding_vectors(basis.p, basis.q, part);
        const std::vector<double> e =
            certify::loc_violation(basis.p, basis.q, basis.cells.index_sets, part);
        std::vector<double> c(in.shapes.size(),
                              std::numeric_limits<double>::quiet_NaN());
        for (std::size_t k = 0; k < link.shape_order.size(); ++k)
            c[static_cast<std::size_t>(link.shape_order[k])] =
                k < link.include_count ? 1.0 : -1.0;
        const certify::Certificate cert =
            certify::find_certificate(basis.cells.bearing, c, e, bounds, part);
        rep << "certificate: "
            << (cert.status == certify::CertificateStatus::feasible      ? "feasible"
                : cert.status == certify::CertificateStatus::infeasible ? "infeasible"
                                                                         : "rank-deficient")
            << "\nmargin: " << fmt(cert.margin) << "\n";
    } catch (const std::invalid_argument& err) {
        rep << "certificate: not-applicable (" << err.what() << ")\n";
    }
    return 0;
}

int run_oracle(const RunConfig& config) {
    LoadedInputs in = load_inputs(config, true);
    if (!config.sparsity) throw std::runtime_error("oracle needs --s");
    const auto problem = solver::SparseCscProblem::constrained(*in.field, in.shapes, 0.0);
    const solver::BruteForceResult best =
        solver::brute_force_cardinal_sc(problem, *config.sparsity);

    const fs::path dir(config.out_dir);
    std::ofstream rep(dir / "report.txt");
    rep << "command: oracle\ns: " << *config.sparsity << "\n";
    rep << "value: " << fmt(best.value) << "\n";
    if (!best.spec) {
        rep << "selection: empty\n";
    } else {
        rep << "include:";
        for (int j : best.spec->include)
            rep << " " << in.spec.entries[static_cast<std::size_t>(j)].label;
        rep << "\nexclude:";
        for (int j : best.spec->exclude)
            rep << " " << in.spec.entries[static_cast<std::size_t>(j)].label;
        rep << "\n";
    }
    return 0;
}

}  // namespace

int run(const RunConfig& config) {
    try {
        fs::create_directories(config.out_dir);
        switch (config.command) {
            case Command::segment: return run_segment(config);
            case Command::sweep: return run_sweep(config);
            case Command::dsd: return run_dsd(config);
            case Command::linkage: return run_linkage(config);
            case Command::certify: return run_certify(config);
            case Command::oracle: return run_oracle(config);
        }
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "shapecomp: " << err.what() << "\n";
        return 1;
    }
}

}  // namespace shapecomp::io
