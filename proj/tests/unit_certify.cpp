#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fixtures.hpp"
#include "generators.hpp"
#include "shapecomp/certify.hpp"
#include "shapecomp/linkage.hpp"
#include "shapecomp/solver.hpp"

using namespace shapecomp;
using fixtures::binary_field;
using fixtures::find_row;
using fixtures::rect_mask;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Example-4.1 style data: the four shapes, the full-cell decomposition, and
// the measure pattern p_1 = 1 - q_1 = 0, q_i = 1 - p_i = 0 for i >= 2, laid
// out in the canonical cell order.
struct LensInstance {
    PixelGrid grid;
    std::vector<ShapeMask> shapes;
    dsd::Decomposition cells;
    std::vector<double> p, q;
    std::size_t lens_cell = 0;  // the cell carrying q = 1
};

LensInstance lens_instance() {
    LensInstance inst;
    inst.shapes = fixtures::example41_shapes(inst.grid);
    inst.cells = dsd::decompose(inst.shapes);
    REQUIRE(inst.cells.shapelets.size() == 7);
    inst.lens_cell = find_row(inst.cells.bearing, {1, 0, 0, 1});
    inst.p.assign(7, 1.0);
    inst.q.assign(7, 0.0);
    inst.p[inst.lens_cell] = 0.0;
    inst.q[inst.lens_cell] = 1.0;
    return inst;
}

}  // namespace

TEST_CASE("partition_beta") {
    SUBCASE("classification by value") {
        const auto part = certify::partition_beta({1.0, 0.0, 2.0, -1.0});
        CHECK(part.gamma_1 == std::vector<std::size_t>{0});
        CHECK(part.gamma_0 == std::vector<std::size_t>{1});
        CHECK(part.gamma_1plus == std::vector<std::size_t>{2});
        CHECK(part.gamma_0minus == std::vector<std::size_t>{3});
        CHECK(part.off_support() == std::vector<std::size_t>{0, 1});
    }

    SUBCASE("in-band values are rejected") {
        CHECK_THROWS_AS(certify::partition_beta({0.5}), std::invalid_argument);
    }

    SUBCASE("snapping within 1e-9") {
        const auto part = certify::partition_beta({1.0 + 5e-10, -5e-10});
        CHECK(part.gamma_1 == std::vector<std::size_t>{0});
        CHECK(part.gamma_0 == std::vector<std::size_t>{1});
    }

    SUBCASE("three-shape linkage beta partitions as expected") {
        PixelGrid grid;
        const auto shapes = fixtures::three_shape_geometry(grid);
        const auto link = linkage::linkage_alpha(shapes, dsd::CompositionSpec({0, 1}, {2}));
        const auto part = certify::partition_beta(link.beta);
        // (1, 1, -1, 2, 0) over the conventional listing: two unit cells,
        // one negative, one above one, one zero.
        CHECK(part.gamma_1.size() == 2);
        CHECK(part.gamma_0minus.size() == 1);
        CHECK(part.gamma_1plus.size() == 1);
        CHECK(part.gamma_0.size() == 1);
        CHECK(part.gamma_1.size() == link.unit_shapelets.size());
    }
}

TEST_CASE("bounding_vectors") {
    SUBCASE("lens instance reproduces l = (0,-1,-1), u = (1,0,0)") {
        const auto inst = lens_instance();
        // beta for alpha = (1,-1,-1,0).
        const auto beta = inst.cells.bearing.apply({1.0, -1.0, -1.0, 0.0});
        const auto part = certify::partition_beta(beta);
        const auto bounds = certify::bounding_vectors(inst.p, inst.q, part);

        REQUIRE(bounds.cells.size() == 3);
        const std::size_t lens = inst.lens_cell;
        const std::size_t c12 = find_row(inst.cells.bearing, {1, 1, 0, 0});
        const std::size_t c13 = find_row(inst.cells.bearing, {1, 0, 1, 0});
        for (std::size_t m = 0; m < 3; ++m) {
            if (bounds.cells[m] == lens) {
                CHECK(bounds.l[m] == 0.0);   // -p over a unit cell
                CHECK(bounds.u[m] == 1.0);   // q - p
            } else {
                CHECK((bounds.cells[m] == c12 || bounds.cells[m] == c13));
                CHECK(bounds.l[m] == -1.0);  // q - p over a zero cell
                CHECK(bounds.u[m] == 0.0);   // q
            }
        }
    }

    SUBCASE("vanishing measures collapse the interval") {
        const auto part = certify::partition_beta({0.0, 1.0});
        const auto bounds = certify::bounding_vectors({0.0, 0.0}, {0.0, 0.0}, part);
        CHECK(bounds.l == std::vector<double>{0.0, 0.0});
        CHECK(bounds.u == std::vector<double>{0.0, 0.0});
    }

    SUBCASE("random measures follow the case formula") {
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> uni(0.0, 2.0);
        std::vector<double> beta{0.0, 1.0, -2.0, 0.0, 3.0, 1.0};
        std::vector<double> p(6), q(6);
        for (std::size_t i = 0; i < 6; ++i) {
            p[i] = uni(rng);
            q[i] = uni(rng);
        }
        const auto part = certify::partition_beta(beta);
        const auto bounds = certify::bounding_vectors(p, q, part);
        for (std::size_t m = 0; m < bounds.cells.size(); ++m) {
            const std::size_t cell = bounds.cells[m];
            if (beta[cell] == 0.0) {
                CHECK(bounds.l[m] == q[cell] - p[cell]);
                CHECK(bounds.u[m] == q[cell]);
            } else {
                CHECK(bounds.l[m] == -p[cell]);
                CHECK(bounds.u[m] == q[cell] - p[cell]);
            }
        }
    }
}

TEST_CASE("loc_violation") {
    SUBCASE("vanishes without support cells") {
        const auto part = certify::partition_beta({0.0, 1.0, 0.0});
        const auto e = certify::loc_violation({1.0, 1.0, 1.0}, {0.5, 0.5, 0.5},
                                              {{0, 1}, {1, 2}}, part);
        CHECK(e == std::vector<double>{0.0, 0.0});
    }

    SUBCASE("vanishes for a covering alpha under the lucid object condition") {
        PixelGrid grid;
        const auto shapes = fixtures::three_shape_geometry(grid);
        const dsd::CompositionSpec spec({0, 1}, {2});
        const auto sigma = dsd::compose_region(shapes, spec);
        const auto field = binary_field(grid, sigma);
        const auto basis = solver::build_cells(field, shapes);

        const auto link = linkage::linkage_alpha(shapes, spec);
        const auto beta = basis.cells.bearing.apply(linkage::embed_alpha(link, 3));
        const auto part = certify::partition_beta(beta);
        const auto e =
            certify::loc_violation(basis.p, basis.q, basis.cells.index_sets, part);
        for (double v : e) CHECK(v == doctest::Approx(0.0));
    }

    SUBCASE("random instance matches the double loop") {
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> uni(0.0, 1.5);
        const std::vector<double> beta{2.0, -1.0, 0.0, 1.0, -3.0, 4.0};
        std::vector<double> p(6), q(6);
        for (std::size_t i = 0; i < 6; ++i) {
            p[i] = uni(rng);
            q[i] = uni(rng);
        }
        std::vector<std::vector<std::size_t>> index_sets{{0, 1, 2}, {3, 4}, {0, 5}};
        const auto part = certify::partition_beta(beta);
        const auto e = certify::loc_violation(p, q, index_sets, part);
        for (std::size_t j = 0; j < index_sets.size(); ++j) {
            double want = 0.0;
            for (std::size_t cell : index_sets[j]) {
                if (beta[cell] > 1.0) want += p[cell];
                if (beta[cell] < 0.0) want -= q[cell];
            }
            CHECK(e[j] == doctest::Approx(want));
        }
    }
}

TEST_CASE("find_certificate on the lens instance") {
    const auto inst = lens_instance();

    SUBCASE("the three-shape candidate cannot be certified") {
        const std::vector<double> alpha{1.0, -1.0, -1.0, 0.0};
        const auto beta = inst.cells.bearing.apply(alpha);
        const auto part = certify::partition_beta(beta);
        const auto bounds = certify::bounding_vectors(inst.p, inst.q, part);
        const auto e =
            certify::loc_violation(inst.p, inst.q, inst.cells.index_sets, part);
        for (double v : e) CHECK(v == 0.0);

        const std::vector<double> c{1.0, -1.0, -1.0, kNaN};
        const auto cert = certify::find_certificate(inst.cells.bearing, c, e, bounds, part);
        CHECK_FALSE(cert.feasible);
        CHECK(cert.status == certify::CertificateStatus::infeasible);
        CHECK(cert.margin <= 1e-9);
    }

    SUBCASE("the single-shape candidate is certified with margin") {
        const std::vector<double> alpha{0.0, 0.0, 0.0, 1.0};
        const auto beta = inst.cells.bearing.apply(alpha);
        const auto part = certify::partition_beta(beta);
        const auto bounds = certify::bounding_vectors(inst.p, inst.q, part);
        const auto e =
            certify::loc_violation(inst.p, inst.q, inst.cells.index_sets, part);

        const std::vector<double> c{kNaN, kNaN, kNaN, 1.0};
        const auto cert = certify::find_certificate(inst.cells.bearing, c, e, bounds, part);
        CHECK(cert.feasible);
        CHECK(cert.status == certify::CertificateStatus::feasible);
        CHECK(cert.margin > 1e-9);
        for (double cj : cert.c) CHECK(std::abs(cj) <= 1.0 + 1e-9);
        // The realized certificate satisfies the equality system.
        const auto off = part.off_support();
        for (std::size_t j = 0; j < 4; ++j) {
            double lhs = cert.eta_c * cert.c[j];
            for (std::size_t m = 0; m < off.size(); ++m)
                if (inst.cells.bearing.rows[off[m]][j]) lhs += cert.eta[m];
            CHECK(lhs == doctest::Approx(e[j]).epsilon(1e-8));
        }
    }

    SUBCASE("degenerate bounds cannot hold strictly") {
        const auto part = certify::partition_beta({0.0, 1.0});
        const auto bounds = certify::bounding_vectors({0.0, 0.0}, {0.0, 0.0}, part);
        dsd::BearingMatrix bearing;
        bearing.shape_count = 2;
        bearing.rows = {{1, 0}, {1, 1}};
        const auto cert = certify::find_certificate(bearing, {1.0, -1.0}, {0.0, 0.0},
                                                    bounds, part);
        CHECK_FALSE(cert.feasible);
    }
}

TEST_CASE("certified minimizers are recovered by the solver") {
    // End-to-end composition of the optimality pieces on the disjoint
    // dictionary: the closed-form minimizer admits a certificate, the tangent
    // witness exists, and the constrained solve lands on it.
    PixelGrid grid(16, 16);
    const std::vector<ShapeMask> shapes{rect_mask(grid, 0, 0, 4, 4),
                                        rect_mask(grid, 6, 0, 10, 4),
                                        rect_mask(grid, 0, 6, 4, 10)};
    const double diffs[3] = {-2.0, -1.0, 3.0};
    std::vector<double> pin(grid.size(), 1.0), pex(grid.size(), 0.0);
    for (int j = 0; j < 3; ++j)
        shapes[static_cast<std::size_t>(j)].pixels.for_each([&](std::size_t i) {
            pin[i] = std::max(diffs[j], 0.0);
            pex[i] = std::max(-diffs[j], 0.0);
        });
    const InhomogeneityField field(grid, pin, pex);
    const std::vector<double> alpha_star{1.0, 1.0, 0.0};

    const auto basis = solver::build_cells(field, shapes);
    const auto beta = basis.cells.bearing.apply(alpha_star);
    const auto part = certify::partition_beta(beta);
    const auto bounds = certify::bounding_vectors(basis.p, basis.q, part);
    const auto e = certify::loc_violation(basis.p, basis.q, basis.cells.index_sets, part);
    const std::vector<double> c{1.0, 1.0, kNaN};
    const auto cert = certify::find_certificate(basis.cells.bearing, c, e, bounds, part);
    REQUIRE(cert.feasible);

    const auto problem = solver::SparseCscProblem::constrained(field, shapes, 2.0);
    const auto sol = solver::solve_constrained(problem, {});
    CHECK(sol.support.first == std::vector<int>{0, 1});
    CHECK(sol.support.second.empty());
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(std::abs(sol.alpha[j] - alpha_star[j]) <= 1e-3);
}

TEST_CASE("certificate plus tangent witness pin the constrained minimizer") {
    // Lucid-object composition: the witness establishes the tangent cone
    // property, the certificate the uniqueness on the hyperplane slice, and
    // the solve must then land on the embedded linkage vector.
    PixelGrid grid;
    auto shapes = fixtures::three_shape_geometry(grid);
    const dsd::CompositionSpec spec({0, 1}, {2});
    const auto sigma = dsd::compose_region(shapes, spec);
    const auto field = binary_field(grid, sigma);

    const auto link = linkage::linkage_alpha(shapes, spec);
    const auto alpha_star = linkage::embed_alpha(link, shapes.size());
    double tau = 0.0;
    for (double a : alpha_star) tau += std::abs(a);
    const auto problem = solver::SparseCscProblem::constrained(field, shapes, tau);

    const auto witness = certify::tangent_witness_loc(problem, spec, alpha_star);
    REQUIRE(witness.found);

    const auto basis = solver::build_cells(field, shapes);
    const auto beta = basis.cells.bearing.apply(alpha_star);
    const auto part = certify::partition_beta(beta);
    const auto bounds = certify::bounding_vectors(basis.p, basis.q, part);
    const auto e = certify::loc_violation(basis.p, basis.q, basis.cells.index_sets, part);
    std::vector<double> c{1.0, 1.0, -1.0};
    const auto cert = certify::find_certificate(basis.cells.bearing, c, e, bounds, part);
    REQUIRE(cert.feasible);

    const auto sol = solver::solve_constrained(problem, {});
    CHECK(sol.support.first == spec.include);
    CHECK(sol.support.second == spec.exclude);
    for (std::size_t j = 0; j < alpha_star.size(); ++j)
        CHECK(std::abs(sol.alpha[j] - alpha_star[j]) <= 1e-3);
}

TEST_CASE("tangent_witness_loc") {
    PixelGrid grid;
    const auto shapes = fixtures::three_shape_geometry(grid);
    const dsd::CompositionSpec spec({0, 1}, {2});
    const auto sigma = dsd::compose_region(shapes, spec);

    SUBCASE("without exterior shapes the witness is 2 alpha*") {
        const auto field = binary_field(grid, sigma);
        const auto problem = solver::SparseCscProblem::constrained(field, shapes, 4.0);
        const auto link = linkage::linkage_alpha(shapes, spec);
        const auto alpha = linkage::embed_alpha(link, shapes.size());
        const auto witness = certify::tangent_witness_loc(problem, spec, alpha);
        REQUIRE(witness.found);
        CHECK(witness.k == 2.0);
        for (std::size_t j = 0; j < alpha.size(); ++j)
            CHECK(witness.alpha_hat[j] == doctest::Approx(2.0 * alpha[j]));
    }

    SUBCASE("an exterior shape off the region still admits a witness") {
        auto dict = shapes;
        dict.push_back(rect_mask(grid, 9, 0, 12, 3));  // outside sigma
        const auto field = binary_field(grid, sigma);
        const auto problem = solver::SparseCscProblem::constrained(field, dict, 4.0);
        const auto link = linkage::linkage_alpha(dict, spec);
        const auto alpha = linkage::embed_alpha(link, dict.size());
        const auto witness = certify::tangent_witness_loc(problem, spec, alpha);
        REQUIRE(witness.found);
        CHECK(witness.epsilon == doctest::Approx(1e-3));
        CHECK(solver::objective(problem, witness.alpha_hat) ==
              doctest::Approx(solver::objective(problem, alpha)));
    }

    SUBCASE("violated LOC is a precondition error") {
        // Flip the field: bright inside sigma.
        std::vector<double> values(grid.size(), 0.0);
        sigma.for_each([&](std::size_t i) { values[i] = 1.0; });
        const auto field =
            chan_vese_measures(Image(grid, std::move(values)), 0.25, 0.75);
        const auto problem = solver::SparseCscProblem::constrained(field, shapes, 4.0);
        CHECK_THROWS_AS(
            certify::tangent_witness_loc(problem, spec, {1.0, 1.0, -2.0}),
            std::invalid_argument);
    }
}

TEST_CASE("bearing_constants") {
    SUBCASE("no excludes gives w = -1 on every unit shapelet") {
        PixelGrid grid(12, 4);
        const std::vector<ShapeMask> shapes{rect_mask(grid, 0, 0, 4, 4),
                                            rect_mask(grid, 5, 0, 9, 4)};
        const dsd::CompositionSpec spec({0, 1}, {});
        const auto link = linkage::linkage_alpha(shapes, spec);
        const auto dec = dsd::decompose(shapes);
        const auto bc = certify::bearing_constants(dec.bearing, link.unit_shapelets,
                                                   link.null_shapelets, {1.0, 1.0});
        CHECK(bc.w == std::vector<double>{-1.0, -1.0});
        CHECK(bc.bounds_ok);
    }

    SUBCASE("single overlapping exclude solves the 2x2 system") {
        PixelGrid grid(10, 4);
        const std::vector<ShapeMask> shapes{rect_mask(grid, 0, 0, 6, 4),
                                            rect_mask(grid, 4, 0, 9, 4)};
        const dsd::CompositionSpec spec({0}, {1});
        const auto link = linkage::linkage_alpha(shapes, spec);
        std::vector<ShapeMask> ordered{shapes[0], shapes[1]};
        const auto dec = dsd::decompose(ordered);
        const auto bc = certify::bearing_constants(dec.bearing, link.unit_shapelets,
                                                   link.null_shapelets, {1.0, -1.0});
        // Unit row [1,0], null row [1,1]: w_unit + w_null = -1, w_null = 1.
        REQUIRE(bc.w.size() == 2);
        const bool unit_first = dec.bearing.rows[bc.rows[0]] == std::vector<std::uint8_t>{1, 0};
        const double w_unit = unit_first ? bc.w[0] : bc.w[1];
        const double w_null = unit_first ? bc.w[1] : bc.w[0];
        CHECK(w_null == doctest::Approx(1.0));
        CHECK(w_unit == doctest::Approx(-2.0));
        CHECK(bc.bounds_ok);
    }

    SUBCASE("random basic compositions satisfy the dual bounds") {
        std::mt19937 rng(123);
        for (int done = 0; done < 25; ++done) {
            const auto inst =
                generators::sample_recovery_instance(rng, 20, 3, 2, 0, false);
            std::vector<ShapeMask> ordered;
            for (int j : inst.link.shape_order)
                ordered.push_back(inst.dictionary[static_cast<std::size_t>(j)]);
            const auto dec = dsd::decompose(ordered);
            std::vector<double> c(inst.link.alpha.size());
            for (std::size_t k = 0; k < c.size(); ++k)
                c[k] = k < inst.link.include_count ? 1.0 : -1.0;
            const auto bc = certify::bearing_constants(dec.bearing, inst.link.unit_shapelets,
                                                       inst.link.null_shapelets, c);
            CHECK(bc.bounds_ok);
        }
    }
}

TEST_CASE("geometric_coherence") {
    PixelGrid grid;
    auto shapes = fixtures::three_shape_geometry(grid);
    const dsd::CompositionSpec spec({0, 1}, {2});
    const auto link = linkage::linkage_alpha(shapes, spec);
    const auto restricted = dsd::decompose(shapes);

    std::vector<std::size_t> rows = link.unit_shapelets;
    rows.insert(rows.end(), link.null_shapelets.begin(), link.null_shapelets.end());
    std::sort(rows.begin(), rows.end());
    const auto bc =
        certify::bearing_constants(restricted.bearing, link.unit_shapelets,
                                   link.null_shapelets, {1.0, 1.0, -1.0});
    std::vector<dsd::Shapelet> selected;
    for (std::size_t i : bc.rows) selected.push_back(restricted.shapelets[i]);

    SUBCASE("a disjoint exterior shape has zero coherence") {
        // The fixture union covers its 12x8 grid, so rebuild the same
        // overlap structure with spare room for a detached shape.
        PixelGrid wide(18, 10);
        std::vector<ShapeMask> dict{rect_mask(wide, 0, 0, 8, 8),
                                    rect_mask(wide, 5, 0, 12, 8),
                                    rect_mask(wide, 3, 2, 7, 6)};
        const auto wlink = linkage::linkage_alpha(dict, spec);
        const auto wrestricted = dsd::decompose(dict);
        const auto wbc =
            certify::bearing_constants(wrestricted.bearing, wlink.unit_shapelets,
                                       wlink.null_shapelets, {1.0, 1.0, -1.0});
        std::vector<dsd::Shapelet> wsel;
        for (std::size_t i : wbc.rows) wsel.push_back(wrestricted.shapelets[i]);
        dict.push_back(rect_mask(wide, 14, 1, 17, 4));
        const auto cells = dsd::decompose(dict);
        const auto c = certify::geometric_coherence(cells, wsel, {3}, wbc.w);
        REQUIRE(c.size() == 1);
        CHECK(c[0] == 0.0);
    }

    SUBCASE("an exterior equal to a null shapelet has coherence w <= 1") {
        std::size_t null_row = link.null_shapelets[0];
        auto dict = shapes;
        dict.push_back(ShapeMask(restricted.shapelets[null_row].pixels));
        const auto cells = dsd::decompose(dict);
        const auto c = certify::geometric_coherence(cells, selected, {3}, bc.w);
        double w_null = 0.0;
        for (std::size_t k = 0; k < bc.rows.size(); ++k)
            if (bc.rows[k] == null_row) w_null = bc.w[k];
        CHECK(c[0] == doctest::Approx(std::abs(w_null)));
        CHECK(c[0] <= 1.0 + 1e-12);
    }

    SUBCASE("an exterior covering a unit shapelet fails the coherence bound") {
        std::size_t unit_row = link.unit_shapelets[0];
        auto dict = shapes;
        dict.push_back(ShapeMask(restricted.shapelets[unit_row].pixels));
        const auto cells = dsd::decompose(dict);
        const auto c = certify::geometric_coherence(cells, selected, {3}, bc.w);
        CHECK(c[0] >= 1.0);
    }
}

TEST_CASE("verify_recovery_conditions") {
    SUBCASE("no exterior shapes: verdict follows the basic structure") {
        PixelGrid grid;
        const auto shapes = fixtures::three_shape_geometry(grid);
        const auto report =
            certify::verify_recovery_conditions(shapes, dsd::CompositionSpec({0, 1}, {2}));
        CHECK(report.row_rank_ok);
        CHECK(report.verdict);
        CHECK(report.exterior.empty());
        CHECK(report.constants.bounds_ok);
    }

    SUBCASE("non-basic composition is rejected") {
        PixelGrid grid;
        const auto shapes = fixtures::five_rect_degenerate(grid);
        CHECK_THROWS_AS(certify::verify_recovery_conditions(
                            shapes, dsd::CompositionSpec({0, 1, 2}, {3, 4})),
                        std::invalid_argument);
    }

    SUBCASE("scattered exterior shapes keep a true verdict with zero coherence") {
        // Same overlap structure as the three-shape fixture, on a grid wide
        // enough to leave room off the composition union.
        PixelGrid grid(18, 10);
        std::vector<ShapeMask> shapes{rect_mask(grid, 0, 0, 8, 8),
                                      rect_mask(grid, 5, 0, 12, 8),
                                      rect_mask(grid, 3, 2, 7, 6)};
        shapes.push_back(rect_mask(grid, 13, 1, 16, 4));
        shapes.push_back(rect_mask(grid, 14, 6, 17, 9));
        const auto report =
            certify::verify_recovery_conditions(shapes, dsd::CompositionSpec({0, 1}, {2}));
        CHECK(report.verdict);
        for (double c : report.coherence) CHECK(c == 0.0);
        CHECK(report.exempt == std::vector<bool>{true, true});
    }

    SUBCASE("an exterior occupying the lone lucid cell blocks recovery") {
        PixelGrid grid;
        const auto shapes = fixtures::example41_shapes(grid);
        // Composition S1 \ (S2 u S3) with S4 the exterior equal to its
        // closure: the coherence of S4 is |w| of the unit shapelet = 3.
        const auto report = certify::verify_recovery_conditions(
            shapes, dsd::CompositionSpec({0}, {1, 2}));
        REQUIRE(report.exterior == std::vector<int>{3});
        CHECK(report.coherence[0] >= 1.0);
        CHECK_FALSE(report.verdict);
    }
}
