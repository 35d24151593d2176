#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "shapecomp/dictionary.hpp"
#include "shapecomp/pgm.hpp"
#include "shapecomp/runner.hpp"

using namespace shapecomp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "shapecomp_io" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// The three-shape fixture as a dictionary document plus a matching binary
// image (dark inside the composed region).
void write_three_shape_inputs(const fs::path& dir) {
    std::ofstream(dir / "dict.json") << R"({
      "grid": {"width": 12, "height": 8},
      "entries": [
        {"label": "a", "type": "rectangle", "x": 0, "y": 0, "w": 8, "h": 8},
        {"label": "b", "type": "rectangle", "x": 5, "y": 0, "w": 7, "h": 8},
        {"label": "c", "type": "rectangle", "x": 3, "y": 2, "w": 4, "h": 4}
      ]
    })";
    PixelGrid grid;
    const auto shapes = fixtures::three_shape_geometry(grid);
    const auto sigma = dsd::compose_region(shapes, dsd::CompositionSpec({0, 1}, {2}));
    PixelSet bright = PixelSet::full(grid);
    bright -= sigma;
    write_pgm_mask((dir / "image.pgm").string(), bright);
}

}  // namespace

TEST_CASE("parse_dictionary") {
    SUBCASE("single covering rectangle") {
        const auto spec = io::parse_dictionary(
            R"({"grid": {"width": 4, "height": 4},
                "entries": [{"label": "all", "type": "rectangle",
                             "x": 0, "y": 0, "w": 4, "h": 4}]})");
        REQUIRE(spec.entries.size() == 1);
        CHECK(io::rasterize(spec.entries[0], spec.grid).area() == 16);
    }

    SUBCASE("syntax errors carry the line number") {
        try {
            io::parse_dictionary("{\n  \"grid\": {,}\n}");
            FAIL("expected a parse error");
        } catch (const std::runtime_error& err) {
            CHECK(std::string(err.what()).find("line 2") != std::string::npos);
        }
    }

    SUBCASE("malformed angle field") {
        CHECK_THROWS_WITH_AS(
            io::parse_dictionary(
                R"({"grid": {"width": 4, "height": 4},
                    "entries": [{"label": "r", "type": "rectangle",
                                 "x": 0, "y": 0, "w": 2, "h": 2, "angle": "ten"}]})"),
            doctest::Contains("angle"), std::runtime_error);
    }

    SUBCASE("duplicate labels rejected") {
        CHECK_THROWS_WITH_AS(
            io::parse_dictionary(
                R"({"grid": {"width": 4, "height": 4},
                    "entries": [
                      {"label": "r", "type": "rectangle", "x": 0, "y": 0, "w": 2, "h": 2},
                      {"label": "r", "type": "disc", "cx": 1, "cy": 1, "r": 1}]})"),
            doctest::Contains("duplicate"), std::runtime_error);
    }

    SUBCASE("empty rasterization names the entry") {
        CHECK_THROWS_WITH_AS(
            io::parse_dictionary(
                R"({"grid": {"width": 4, "height": 4},
                    "entries": [{"label": "offgrid", "type": "rectangle",
                                 "x": 10, "y": 10, "w": 2, "h": 2}]})"),
            doctest::Contains("offgrid"), std::runtime_error);
    }

    SUBCASE("the bundled block generator yields the 1200-entry dictionary") {
        const auto spec = io::square_grid_dictionary(120, 100, 15, 40, 30);
        const auto reparsed = io::parse_dictionary(io::render_dictionary(spec));
        CHECK(reparsed.entries.size() == 1200);
        CHECK(reparsed == spec);
    }
}

TEST_CASE("rasterize") {
    PixelGrid grid(8, 8);

    SUBCASE("axis-aligned unit squares cover exactly") {
        const io::DictionaryEntry entry{"r", io::RectangleEntry{0, 0, 2, 2, 0}};
        CHECK(io::rasterize(entry, grid).area() == 4);
    }

    SUBCASE("a small disc at a pixel center keeps one pixel") {
        const io::DictionaryEntry entry{"d", io::DiscEntry{3.5, 4.5, 0.4}};
        const auto mask = io::rasterize(entry, grid);
        REQUIRE(mask.area() == 1);
        CHECK(mask.pixels.test(grid.index(3, 4)));
    }

    SUBCASE("right-angle rotation equals the transposed rectangle") {
        for (int rep = 0; rep < 4; ++rep) {
            const double x = rep, y = rep % 2, w = 4, h = 2;
            const io::DictionaryEntry rotated{
                "r", io::RectangleEntry{x, y, w, h, 90.0 + 360.0 * rep}};
            const double cx = x + w / 2, cy = y + h / 2;
            const io::DictionaryEntry transposed{
                "t", io::RectangleEntry{cx - h / 2, cy - w / 2, h, w, 0}};
            CHECK(io::rasterize(rotated, grid).pixels ==
                  io::rasterize(transposed, grid).pixels);
        }
    }

    SUBCASE("polygon matches the rectangle it outlines") {
        const io::DictionaryEntry poly{
            "p", io::PolygonEntry{{{1, 1}, {5, 1}, {5, 4}, {1, 4}}}};
        const io::DictionaryEntry rect{"r", io::RectangleEntry{1, 1, 4, 3, 0}};
        CHECK(io::rasterize(poly, grid).pixels == io::rasterize(rect, grid).pixels);
    }

    SUBCASE("ellipse degenerates to the disc") {
        const io::DictionaryEntry e{"e", io::EllipseEntry{4, 4, 2, 2, 30}};
        const io::DictionaryEntry d{"d", io::DiscEntry{4, 4, 2}};
        CHECK(io::rasterize(e, grid).pixels == io::rasterize(d, grid).pixels);
    }

    SUBCASE("raster entries translate and rotate exactly at right angles") {
        const auto dir = fresh_dir("raster_entry");
        PixelGrid small(4, 4);
        // L-tromino in the corner of a 4x4 mask file.
        PixelSet tromino(small);
        tromino.set(small.index(0, 0));
        tromino.set(small.index(0, 1));
        tromino.set(small.index(1, 1));
        write_pgm_mask((dir / "piece.pgm").string(), tromino);

        const io::DictionaryEntry shifted{
            "s", io::RasterEntry{"piece.pgm", 2.0, 3.0, 0.0}};
        const auto mask = io::rasterize(shifted, grid, dir.string());
        PixelSet want(grid);
        want.set(grid.index(2, 3));
        want.set(grid.index(2, 4));
        want.set(grid.index(3, 4));
        CHECK(mask.pixels == want);

        const io::DictionaryEntry spun{
            "q", io::RasterEntry{"piece.pgm", 2.0, 3.0, 180.0}};
        const auto turned = io::rasterize(spun, grid, dir.string());
        CHECK(turned.area() == 3);
    }
}

TEST_CASE("render/parse round trip") {
    const auto dir = fresh_dir("roundtrip");
    PixelGrid small(3, 3);
    write_pgm_mask((dir / "m.pgm").string(), PixelSet::full(small));

    io::DictionarySpec spec;
    spec.grid = PixelGrid(10, 10);
    spec.entries = {
        {"r", io::RectangleEntry{1, 1, 4, 3, 45}},
        {"d", io::DiscEntry{5, 5, 2}},
        {"e", io::EllipseEntry{4, 4, 3, 2, 10}},
        {"p", io::PolygonEntry{{{0, 0}, {4, 0}, {4, 4}}}},
        {"m", io::RasterEntry{"m.pgm", 1, 2, 90}},
    };
    const auto reparsed = io::parse_dictionary(io::render_dictionary(spec), dir.string());
    CHECK(reparsed == spec);
}

TEST_CASE("runner commands") {
    const auto dir = fresh_dir("runner");
    write_three_shape_inputs(dir);

    io::RunConfig base;
    base.image_path = (dir / "image.pgm").string();
    base.dict_path = (dir / "dict.json").string();
    base.u_in = 0.25;
    base.u_ex = 0.75;

    SUBCASE("segment produces mask, csv and report deterministically") {
        io::RunConfig config = base;
        config.command = io::Command::segment;
        config.tau = 4.0;
        config.out_dir = (dir / "seg1").string();
        CHECK(io::run(config) == 0);

        const std::string csv = slurp(dir / "seg1" / "alpha.csv");
        CHECK(csv.find("index,label,alpha") == 0);
        CHECK(csv.find("1,a,1") != std::string::npos);
        CHECK(csv.find("3,c,-2") != std::string::npos);

        // A support mask holds only 0/255 bytes.
        const std::string mask = slurp(dir / "seg1" / "alpha.pgm");
        const std::size_t raster_at = mask.find("255\n") + 4;
        for (std::size_t i = raster_at; i < mask.size(); ++i) {
            const unsigned char b = static_cast<unsigned char>(mask[i]);
            CHECK((b == 0 || b == 255));
        }

        config.out_dir = (dir / "seg2").string();
        CHECK(io::run(config) == 0);
        CHECK(slurp(dir / "seg2" / "alpha.csv") == csv);
        CHECK(slurp(dir / "seg2" / "alpha.pgm") == mask);
    }

    SUBCASE("segment with tau 0 writes an all-zero mask") {
        io::RunConfig config = base;
        config.command = io::Command::segment;
        config.tau = 0.0;
        config.out_dir = (dir / "seg0").string();
        CHECK(io::run(config) == 0);
        const auto mask = read_pgm_mask((dir / "seg0" / "alpha.pgm").string());
        CHECK(mask.empty());
    }

    SUBCASE("sweep writes one row per budget") {
        io::RunConfig config = base;
        config.command = io::Command::sweep;
        config.tau_list = {1.0, 2.0, 4.0};
        config.out_dir = (dir / "sweep").string();
        CHECK(io::run(config) == 0);
        const std::string summary = slurp(dir / "sweep" / "summary.txt");
        CHECK(summary.find("tau objective support_size converged") == 0);
        int lines = 0;
        for (char ch : summary)
            if (ch == '\n') ++lines;
        CHECK(lines == 4);
    }

    SUBCASE("dsd writes the bearing grid") {
        io::RunConfig config = base;
        config.command = io::Command::dsd;
        config.out_dir = (dir / "dsd").string();
        CHECK(io::run(config) == 0);
        CHECK(slurp(dir / "dsd" / "bearing.txt") == "0 1 0\n1 0 0\n1 0 1\n1 1 0\n1 1 1\n");
        CHECK(slurp(dir / "dsd" / "report.txt").find("partition_check: pass") !=
              std::string::npos);
    }

    SUBCASE("linkage reports the alpha representative") {
        io::RunConfig config = base;
        config.command = io::Command::linkage;
        config.include = {"a", "b"};
        config.exclude = {"c"};
        config.out_dir = (dir / "linkage").string();
        CHECK(io::run(config) == 0);
        const std::string report = slurp(dir / "linkage" / "report.txt");
        CHECK(report.find("a=1") != std::string::npos);
        CHECK(report.find("c=-2") != std::string::npos);
        CHECK(report.find("unique: yes") != std::string::npos);
        CHECK(report.find("basic: yes") != std::string::npos);
    }

    SUBCASE("certify reports recovery and a certificate") {
        io::RunConfig config = base;
        config.command = io::Command::certify;
        config.include = {"a", "b"};
        config.exclude = {"c"};
        config.out_dir = (dir / "certify").string();
        CHECK(io::run(config) == 0);
        const std::string report = slurp(dir / "certify" / "report.txt");
        CHECK(report.find("recovery_verdict: yes") != std::string::npos);
        CHECK(report.find("certificate: feasible") != std::string::npos);
    }

    SUBCASE("oracle agrees with the segment support on a two-shape toy") {
        const auto toy = fresh_dir("toy");
        std::ofstream(toy / "dict.json") << R"({
          "grid": {"width": 10, "height": 4},
          "entries": [
            {"label": "left", "type": "rectangle", "x": 0, "y": 0, "w": 4, "h": 4},
            {"label": "right", "type": "rectangle", "x": 6, "y": 0, "w": 4, "h": 4}
          ]
        })";
        PixelGrid grid(10, 4);
        PixelSet bright = PixelSet::full(grid);
        bright -= fixtures::rect_set(grid, 0, 0, 4, 4);  // left block dark
        write_pgm_mask((toy / "image.pgm").string(), bright);

        io::RunConfig config;
        config.image_path = (toy / "image.pgm").string();
        config.dict_path = (toy / "dict.json").string();
        config.u_in = 0.25;
        config.u_ex = 0.75;
        config.out_dir = (toy / "oracle").string();
        config.command = io::Command::oracle;
        config.sparsity = 1;
        CHECK(io::run(config) == 0);
        CHECK(slurp(toy / "oracle" / "report.txt").find("include: left") !=
              std::string::npos);

        config.command = io::Command::segment;
        config.tau = 1.0;
        config.out_dir = (toy / "segment").string();
        CHECK(io::run(config) == 0);
        CHECK(slurp(toy / "segment" / "report.txt").find("support+: left") !=
              std::string::npos);
    }

    SUBCASE("missing inputs exit with status 1") {
        io::RunConfig config = base;
        config.command = io::Command::segment;
        config.tau = 1.0;
        config.dict_path = (dir / "absent.json").string();
        config.out_dir = (dir / "fail").string();
        CHECK(io::run(config) == 1);
    }

    SUBCASE("non-convergence exits with status 2 but still writes artifacts") {
        io::RunConfig config = base;
        config.command = io::Command::segment;
        config.tau = 4.0;
        config.solver.max_iters = 60;
        config.solver.step_scale = 0.01;
        config.solver.polish = false;
        config.out_dir = (dir / "noconv").string();
        CHECK(io::run(config) == 2);
        CHECK(fs::exists(dir / "noconv" / "alpha.csv"));
        CHECK(fs::exists(dir / "noconv" / "alpha.pgm"));
        CHECK(slurp(dir / "noconv" / "report.txt").find("converged: no") !=
              std::string::npos);
    }

    SUBCASE("levels fall back to the histogram quantiles") {
        io::RunConfig config = base;
        config.u_in.reset();
        config.u_ex.reset();
        config.command = io::Command::segment;
        config.tau = 4.0;
        config.out_dir = (dir / "quant").string();
        CHECK(io::run(config) == 0);
        // Binary image: the 15%/85% quantiles are the two levels themselves.
        const std::string report = slurp(dir / "quant" / "report.txt");
        CHECK(report.find("u_in: 0\n") != std::string::npos);
        CHECK(report.find("u_ex: 1\n") != std::string::npos);
        CHECK(report.find("support+: a b") != std::string::npos);
    }

    SUBCASE("an observation mask drops missing pixels from the measures") {
        // Mark one off-region pixel as unobserved and corrupt its value;
        // the run is unaffected because the pixel contributes nothing.
        PixelGrid grid(12, 8);
        PixelSet observed = PixelSet::full(grid);
        observed.reset(grid.index(11, 7));
        write_pgm_mask((dir / "observed.pgm").string(), observed);

        io::RunConfig config = base;
        config.command = io::Command::segment;
        config.tau = 4.0;
        config.observed_path = (dir / "observed.pgm").string();
        config.out_dir = (dir / "obs").string();
        CHECK(io::run(config) == 0);
        const std::string csv = slurp(dir / "obs" / "alpha.csv");
        CHECK(csv.find("1,a,1") != std::string::npos);
        CHECK(csv.find("3,c,-2") != std::string::npos);
    }
}
