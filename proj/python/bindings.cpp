#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "shapecomp/certify.hpp"
#include "shapecomp/dictionary.hpp"
#include "shapecomp/dsd.hpp"
#include "shapecomp/grid.hpp"
#include "shapecomp/linkage.hpp"
#include "shapecomp/pgm.hpp"
#include "shapecomp/solver.hpp"

namespace py = pybind11;
using namespace shapecomp;

namespace {

ShapeMask mask_from_indices(const PixelGrid& grid, const std::vector<std::uint32_t>& indices) {
    PixelSet set(grid);
    for (auto i : indices) set.set(i);
    return ShapeMask(std::move(set));
}

py::object big_to_int(const dsd::BigInt& value) {
    return py::module_::import("builtins").attr("int")(value.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sparse convex shape composition toolkit";

    py::class_<PixelGrid>(m, "PixelGrid")
        .def(py::init<int, int>(), py::arg("width"), py::arg("height"))
        .def_readonly("width", &PixelGrid::width)
        .def_readonly("height", &PixelGrid::height)
        .def("size", &PixelGrid::size)
        .def("index", &PixelGrid::index)
        .def("__eq__", [](const PixelGrid& a, const PixelGrid& b) { return a == b; });

    py::class_<PixelSet>(m, "PixelSet")
        .def(py::init<PixelGrid>())
        .def("set", &PixelSet::set)
        .def("test", &PixelSet::test)
        .def("count", &PixelSet::count)
        .def("empty", &PixelSet::empty)
        .def("indices", &PixelSet::to_indices)
        .def("__eq__", [](const PixelSet& a, const PixelSet& b) { return a == b; });

    py::class_<ShapeMask>(m, "ShapeMask")
        .def(py::init<PixelSet>())
        .def(py::init(&mask_from_indices), py::arg("grid"), py::arg("indices"))
        .def_readonly("pixels", &ShapeMask::pixels)
        .def("area", &ShapeMask::area);

    py::class_<Image>(m, "Image")
        .def(py::init<PixelGrid, std::vector<double>, std::optional<PixelSet>>(),
             py::arg("grid"), py::arg("values"), py::arg("observed") = py::none())
        .def_readonly("grid", &Image::grid)
        .def_readonly("values", &Image::values);

    py::class_<InhomogeneityField>(m, "InhomogeneityField")
        .def(py::init<PixelGrid, std::vector<double>, std::vector<double>>(),
             py::arg("grid"), py::arg("pi_in"), py::arg("pi_ex"))
        .def_readonly("grid", &InhomogeneityField::grid)
        .def_readonly("pi_in", &InhomogeneityField::pi_in)
        .def_readonly("pi_ex", &InhomogeneityField::pi_ex);

    py::class_<ShapeIntegrals>(m, "ShapeIntegrals")
        .def_readonly("P", &ShapeIntegrals::P)
        .def_readonly("Q", &ShapeIntegrals::Q);

    py::class_<LocReport>(m, "LocReport")
        .def_readonly("holds", &LocReport::holds)
        .def_readonly("violating_pixels", &LocReport::violating_pixels);

    m.def("chan_vese_measures", &chan_vese_measures, py::arg("image"), py::arg("u_in"),
          py::arg("u_ex"));
    m.def("quantile_levels", &quantile_levels, py::arg("image"), py::arg("lo"),
          py::arg("hi"));
    m.def("shape_integrals", &shape_integrals);
    m.def("loc_holds", &loc_holds);
    m.def("read_pgm", &read_pgm);
    m.def("read_pgm_mask", &read_pgm_mask);
    m.def("write_pgm_mask", &write_pgm_mask);

    py::class_<dsd::ConstructorVector>(m, "ConstructorVector")
        .def_readonly("bits", &dsd::ConstructorVector::bits);

    py::class_<dsd::Shapelet>(m, "Shapelet")
        .def_readonly("pixels", &dsd::Shapelet::pixels)
        .def_readonly("constructor", &dsd::Shapelet::constructor);

    py::class_<dsd::BearingMatrix>(m, "BearingMatrix")
        .def_readonly("shape_count", &dsd::BearingMatrix::shape_count)
        .def_readonly("rows", &dsd::BearingMatrix::rows)
        .def("apply", &dsd::BearingMatrix::apply)
        .def("to_text", &dsd::BearingMatrix::to_text);

    py::class_<dsd::CompositionSpec>(m, "CompositionSpec")
        .def(py::init<std::vector<int>, std::vector<int>>(), py::arg("include"),
             py::arg("exclude") = std::vector<int>{})
        .def_readonly("include", &dsd::CompositionSpec::include)
        .def_readonly("exclude", &dsd::CompositionSpec::exclude);

    py::class_<dsd::Decomposition>(m, "Decomposition")
        .def_readonly("shapelets", &dsd::Decomposition::shapelets)
        .def_readonly("bearing", &dsd::Decomposition::bearing)
        .def_readonly("index_sets", &dsd::Decomposition::index_sets);

    m.def("decompose", &dsd::decompose);
    m.def("compose_region", &dsd::compose_region);
    m.def("is_nonredundant", &dsd::is_nonredundant);
    m.def(
        "count_compositions",
        [](int n_s, std::optional<int> s) { return big_to_int(dsd::count_compositions(n_s, s)); },
        py::arg("n_s"), py::arg("s") = py::none());

    py::class_<linkage::LinkageResult>(m, "LinkageResult")
        .def_readonly("shape_order", &linkage::LinkageResult::shape_order)
        .def_readonly("include_count", &linkage::LinkageResult::include_count)
        .def_readonly("alpha", &linkage::LinkageResult::alpha)
        .def_readonly("beta", &linkage::LinkageResult::beta)
        .def_readonly("unit_shapelets", &linkage::LinkageResult::unit_shapelets)
        .def_readonly("null_shapelets", &linkage::LinkageResult::null_shapelets)
        .def_readonly("unique", &linkage::LinkageResult::unique);

    py::class_<linkage::BasicReport>(m, "BasicReport")
        .def_readonly("basic", &linkage::BasicReport::basic)
        .def_readonly("rank", &linkage::BasicReport::rank)
        .def_readonly("null_count", &linkage::BasicReport::null_count)
        .def_readonly("exclude_count", &linkage::BasicReport::exclude_count)
        .def_readonly("min_w", &linkage::BasicReport::min_w);

    m.def("linkage_alpha", &linkage::linkage_alpha);
    m.def("is_basic", &linkage::is_basic);
    m.def("indicator_coefficients", &linkage::indicator_coefficients);
    m.def("active_sets", &linkage::active_sets);
    m.def("embed_alpha", &linkage::embed_alpha);

    py::class_<solver::SparseCscProblem>(m, "SparseCscProblem")
        .def_static("constrained", &solver::SparseCscProblem::constrained, py::arg("field"),
                    py::arg("dictionary"), py::arg("tau"))
        .def_static("regularized", &solver::SparseCscProblem::regularized, py::arg("field"),
                    py::arg("dictionary"), py::arg("lambda_"));

    py::class_<solver::SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("max_iters", &solver::SolverConfig::max_iters)
        .def_readwrite("step_scale", &solver::SolverConfig::step_scale)
        .def_readwrite("stop_tol", &solver::SolverConfig::stop_tol)
        .def_readwrite("polish", &solver::SolverConfig::polish)
        .def_readwrite("seed", &solver::SolverConfig::seed);

    py::class_<solver::Solution>(m, "Solution")
        .def_readonly("alpha", &solver::Solution::alpha)
        .def_readonly("objective", &solver::Solution::objective)
        .def_readonly("support", &solver::Solution::support)
        .def_readonly("iterations_used", &solver::Solution::iterations_used)
        .def_readonly("converged", &solver::Solution::converged);

    m.def("objective", &solver::objective);
    m.def("separable_objective", &solver::separable_objective);
    m.def("subgradient", &solver::subgradient);
    m.def("project_l1", &solver::project_l1);
    m.def("solve_constrained", &solver::solve_constrained, py::arg("problem"),
          py::arg("config") = solver::SolverConfig{});
    m.def("solve_regularized", &solver::solve_regularized, py::arg("problem"),
          py::arg("config") = solver::SolverConfig{});

    py::class_<solver::ClosedFormSelection>(m, "ClosedFormSelection")
        .def_readonly("indices", &solver::ClosedFormSelection::indices)
        .def_readonly("unique", &solver::ClosedFormSelection::unique);
    m.def("solve_disjoint_closed_form", &solver::solve_disjoint_closed_form);

    py::class_<solver::BruteForceResult>(m, "BruteForceResult")
        .def_readonly("spec", &solver::BruteForceResult::spec)
        .def_readonly("value", &solver::BruteForceResult::value);
    m.def("brute_force_cardinal_sc", &solver::brute_force_cardinal_sc);
    m.def("extract_support", &solver::extract_support);

    py::class_<certify::RecoveryReport>(m, "RecoveryReport")
        .def_readonly("row_rank_ok", &certify::RecoveryReport::row_rank_ok)
        .def_readonly("verdict", &certify::RecoveryReport::verdict)
        .def_readonly("exterior", &certify::RecoveryReport::exterior)
        .def_readonly("coherence", &certify::RecoveryReport::coherence);
    m.def("verify_recovery_conditions", &certify::verify_recovery_conditions);

    py::class_<io::DictionarySpec>(m, "DictionarySpec");
    m.def("parse_dictionary", &io::parse_dictionary, py::arg("text"),
          py::arg("base_dir") = ".");
    m.def("render_dictionary", &io::render_dictionary);
    m.def(
        "rasterize_all",
        [](const io::DictionarySpec& spec, const std::string& base_dir) {
            return io::rasterize_all(spec, base_dir);
        },
        py::arg("spec"), py::arg("base_dir") = ".");
    m.def("square_grid_dictionary", &io::square_grid_dictionary);
}
