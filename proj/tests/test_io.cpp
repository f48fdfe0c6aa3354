#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "growfem/config.hpp"
#include "growfem/displacement.hpp"
#include "growfem/error.hpp"
#include "growfem/fixture.hpp"
#include "growfem/io.hpp"
#include "growfem/mesh.hpp"
#include "growfem/solver.hpp"

using namespace growfem;

namespace {

std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "growfem_io_test";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(bool(f));
    std::stringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

void check_geometry_equal(const StagedGeometry& a, const StagedGeometry& b) {
    CHECK(a.stage_time == b.stage_time);
    REQUIRE(a.curves.size() == b.curves.size());
    for (std::size_t i = 0; i < a.curves.size(); ++i) {
        CHECK(a.curves[i].id == b.curves[i].id);
        CHECK(a.curves[i].closed == b.curves[i].closed);
        REQUIRE(a.curves[i].points.size() == b.curves[i].points.size());
        for (std::size_t j = 0; j < a.curves[i].points.size(); ++j) {
            CHECK(a.curves[i].points[j].x == b.curves[i].points[j].x);
            CHECK(a.curves[i].points[j].y == b.curves[i].points[j].y);
        }
    }
    REQUIRE(a.subdomains.size() == b.subdomains.size());
    for (const auto& [label, pieces] : a.subdomains) {
        REQUIRE(b.subdomains.count(label) == 1);
        const auto& other = b.subdomains.at(label);
        REQUIRE(pieces.size() == other.size());
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            CHECK(pieces[i].curve_id == other[i].curve_id);
            CHECK(pieces[i].orientation == other[i].orientation);
            CHECK(pieces[i].s0 == other[i].s0);
            CHECK(pieces[i].s1 == other[i].s1);
        }
    }
}

const char* kMinimalConfig = R"({"geometry": {"t": "a.csv", "t1": "b.csv"}})";

} // namespace

TEST_CASE("format_double round-trips doubles exactly") {
    const double values[] = {0.0,   -0.0,     1.0 / 3.0, 0.6,    1e-300, 6.02214076e23, 3600.0,
                             -0.25, 1.0e-17, 0.1 + 0.2, 1.0e17, 2.5e-12};
    for (const double v : values) {
        const std::string s = format_double(v);
        char* end = nullptr;
        const double back = std::strtod(s.c_str(), &end);
        CHECK(*end == '\0');
        CHECK(std::memcmp(&back, &v, sizeof v) == 0);
    }
}

TEST_CASE("geometry round-trip preserves the fixture bitwise") {
    const auto [t0, t1] = generate_fixture(1.0);
    const auto dir = temp_dir();
    const auto p0 = (dir / "stage_t.csv").string();
    const auto p1 = (dir / "stage_t1.csv").string();
    write_geometry(t0, p0);
    write_geometry(t1, p1);
    check_geometry_equal(t0, read_geometry(p0));
    check_geometry_equal(t1, read_geometry(p1));
}

TEST_CASE("geometry writes are deterministic") {
    const auto [t0, t1] = generate_fixture(0.7);
    const auto dir = temp_dir();
    write_geometry(t0, (dir / "det_a.csv").string());
    write_geometry(t0, (dir / "det_b.csv").string());
    CHECK(slurp(dir / "det_a.csv") == slurp(dir / "det_b.csv"));
    CHECK(slurp(dir / "det_a.json") == slurp(dir / "det_b.json"));
}

TEST_CASE("geometry reader rejects malformed input") {
    const auto dir = temp_dir();
    const auto path = (dir / "bad.csv").string();
    {
        std::ofstream f(path);
        f << "curve_id,point_index,x,y\nc,0,0,0\nc,1,zzz,1\n";
    }
    CHECK_THROWS_AS(read_geometry(path), Error);
    {
        std::ofstream f(path);
        f << "wrong,header\n";
    }
    CHECK_THROWS_AS(read_geometry(path), Error);
    {
        std::ofstream f(path);
        f << "curve_id,point_index,x,y\nc,0,0,0\nc,2,1,1\n";
    }
    CHECK_THROWS_AS(read_geometry(path), Error);
}

TEST_CASE("displacement CSV round-trips segment and coordinate fields") {
    const auto [t0, t1] = generate_fixture(1.0);
    const auto seg0 = segment_at_intersections(t0);
    const auto seg1 = segment_at_intersections(t1);
    const auto by_segment = build_segment_fields(seg0, seg1, 24);

    std::vector<DisplacementField> fields;
    for (const auto& [key, field] : by_segment)
        fields.push_back(field);
    fields.push_back(uniform_displacement_field(t0.curve("arc1"), t1.curve("arc1"), 16, Keying::Coordinate));

    const auto dir = temp_dir();
    const auto path = (dir / "disp.csv").string();
    write_displacement_csv(fields, path);
    const auto back = read_displacement_csv(path);

    REQUIRE(back.size() == fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
        CHECK(back[i].parent_id == fields[i].parent_id);
        CHECK(back[i].segment_index == fields[i].segment_index);
        CHECK(back[i].keying == fields[i].keying);
        REQUIRE(back[i].rows.size() == fields[i].rows.size());
        for (std::size_t r = 0; r < fields[i].rows.size(); ++r) {
            CHECK(back[i].rows[r].key1 == fields[i].rows[r].key1);
            if (fields[i].keying == Keying::Coordinate)
                CHECK(back[i].rows[r].key2 == fields[i].rows[r].key2);
            CHECK(back[i].rows[r].dx == fields[i].rows[r].dx);
            CHECK(back[i].rows[r].dy == fields[i].rows[r].dy);
        }
    }

    write_displacement_csv(back, (dir / "disp2.csv").string());
    CHECK(slurp(dir / "disp.csv") == slurp(dir / "disp2.csv"));
}

TEST_CASE("displacement CSV parameter rows must leave key2 empty") {
    const auto dir = temp_dir();
    const auto path = (dir / "disp_bad.csv").string();
    std::ofstream(path) << "segment_id,key_type,key1,key2,dx,dy\ns,parameter,0,0.5,1,1\ns,parameter,1,,1,1\n";
    CHECK_THROWS_AS(read_displacement_csv(path), Error);
}

TEST_CASE("segments CSV lists every segment point with junction flags") {
    const auto [t0, t1] = generate_fixture(1.0);
    const auto seg = segment_at_intersections(t0);
    const auto dir = temp_dir();
    const auto path = (dir / "segments.csv").string();
    write_segments_csv(seg, path);

    std::size_t expected_rows = 0;
    for (const auto& [parent, segs] : seg.segments)
        for (const auto& s : segs)
            expected_rows += s.points.size();

    std::ifstream f(path);
    std::string line;
    REQUIRE(bool(std::getline(f, line)));
    CHECK(line == "parent_id,segment_index,point_index,x,y,start_junction,end_junction");
    std::size_t rows = 0;
    std::size_t junction_flagged = 0;
    while (std::getline(f, line)) {
        if (line.empty())
            continue;
        ++rows;
        if (line.back() == '1')
            ++junction_flagged;
    }
    CHECK(rows == expected_rows);
    CHECK(junction_flagged > 0);
}

TEST_CASE("areas and quality writers emit stable headers and rows") {
    const auto dir = temp_dir();
    const auto areas_path = (dir / "areas.csv").string();
    AreasWriter areas(areas_path, {"domain1", "domain2", "domain3"});
    areas.append(0, 0.0, {{"domain1", 0.25}, {"domain2", 0.5}, {"domain3", 0.125}}, 0.875);
    areas.append(1, 0.5, {{"domain1", 0.5}, {"domain2", 1.0}, {"domain3", 0.25}}, 1.75);
    const std::string text = slurp(areas_path);
    CHECK(text == "step,time,area_domain1,area_domain2,area_domain3,area_total\n"
                  "0,0,0.25,0.5,0.125,0.875\n"
                  "1,0.5,0.5,1,0.25,1.75\n");

    const auto quality_path = (dir / "quality.csv").string();
    QualityWriter quality(quality_path);
    QualityReport report;
    report.min_quality = 0.75;
    report.inverted_count = 2;
    quality.append(3, report);
    CHECK(slurp(quality_path) == "step,min_quality,inverted_count\n3,0.75,2\n");
}

TEST_CASE("fields CSV and VTK snapshots cover every node and element") {
    StagedGeometry g;
    g.curves.push_back({"sq", {{0, 0}, {1, 0}, {1, 1}, {0, 1}}, true});
    g.subdomains["domain1"] = {{"sq", 1, 0.0, 1.0}};
    const auto seg = segment_at_intersections(g);
    const auto mesh = triangulate(seg, 0.5);

    std::array<Eigen::VectorXd, 3> c;
    std::array<Eigen::VectorXd, 3> production;
    const long n = long(mesh.nodes.size());
    for (int s = 0; s < 3; ++s) {
        c[std::size_t(s)] = Eigen::VectorXd::Constant(n, 0.5 + s);
        production[std::size_t(s)] = Eigen::VectorXd::Constant(n, 0.125 * (s + 1));
    }

    const auto dir = temp_dir();
    const auto csv_path = (dir / "fields_0000.csv").string();
    write_fields_csv(mesh, c, production, csv_path);
    std::ifstream f(csv_path);
    std::string line;
    REQUIRE(bool(std::getline(f, line)));
    CHECK(line == "node,x,y,A,B,C,P_A,P_B,P_C");
    std::size_t rows = 0;
    while (std::getline(f, line))
        rows += !line.empty();
    CHECK(rows == mesh.nodes.size());

    const auto vtk_path = (dir / "snap_0000.vtk").string();
    write_vtk(mesh, c, production, vtk_path);
    const std::string vtk = slurp(vtk_path);
    CHECK(vtk.rfind("# vtk DataFile Version 3.0\n", 0) == 0);
    CHECK(vtk.find("POINTS " + std::to_string(mesh.nodes.size()) + " double") != std::string::npos);
    CHECK(vtk.find("CELLS " + std::to_string(mesh.triangles.size())) != std::string::npos);
    CHECK(vtk.find("SCALARS subdomain int 1") != std::string::npos);
    CHECK(vtk.find("SCALARS quality double 1") != std::string::npos);
    for (const char* name : {"A", "B", "C", "P_A", "P_B", "P_C"})
        CHECK(vtk.find("SCALARS " + std::string(name) + " double 1") != std::string::npos);

    write_vtk(mesh, c, production, (dir / "snap_again.vtk").string());
    CHECK(slurp(dir / "snap_again.vtk") == vtk);
}

TEST_CASE("config minimal document takes documented defaults") {
    const RunConfig cfg = parse_config(kMinimalConfig);
    CHECK(cfg.geometry_t == "a.csv");
    CHECK(cfg.geometry_t1 == "b.csv");
    CHECK(cfg.mode == Mode::Model2);
    CHECK(cfg.solver.dt == 0.01);
    CHECK(cfg.solver.t_end == 1.0);
    CHECK(cfg.solver.strict_mesh);
    CHECK(cfg.T == 3600.0);
    CHECK(cfg.L == 150.0);
    CHECK(cfg.params.rate.rho_A == doctest::Approx(0.36).epsilon(1e-15));
    CHECK(cfg.params.rate.rho_B == doctest::Approx(18.0).epsilon(1e-15));
    CHECK(cfg.params.rate.rho_C == doctest::Approx(72.0).epsilon(1e-15));
    CHECK(cfg.params.rate.d_A == doctest::Approx(3.6e-3).epsilon(1e-15));
    CHECK(cfg.params.rate.D_diff == doctest::Approx(3600.0).epsilon(1e-15));
    CHECK(!cfg.params.rate.D_A);
    CHECK(cfg.params.hill.K_BA == 0.2);
    CHECK(cfg.output_dir == "out");
    CHECK(cfg.n_points_per_segment == 100);
    CHECK(cfg.target_edge_length == 0.0);
    CHECK(cfg.snapshot_every == 0);
}

TEST_CASE("config rate defaults scale with T and explicit values win") {
    const RunConfig scaled = parse_config(
        R"({"geometry": {"t": "a", "t1": "b"}, "params": {"T": 7200}})");
    CHECK(scaled.params.rate.rho_A == doctest::Approx(0.72).epsilon(1e-15));
    CHECK(scaled.params.rate.rho_B == doctest::Approx(36.0).epsilon(1e-15));
    CHECK(scaled.params.rate.rho_C == doctest::Approx(144.0).epsilon(1e-15));
    CHECK(scaled.params.rate.d_B == doctest::Approx(7.2e-3).epsilon(1e-15));
    CHECK(scaled.params.rate.D_diff == doctest::Approx(7200.0).epsilon(1e-15));

    const RunConfig overridden = parse_config(
        R"({"geometry": {"t": "a", "t1": "b"}, "params": {"T": 7200, "rho_A": 0.5, "D_B": 12.0}})");
    CHECK(overridden.params.rate.rho_A == 0.5);
    CHECK(overridden.params.rate.rho_B == doctest::Approx(36.0).epsilon(1e-15));
    REQUIRE(bool(overridden.params.rate.D_B));
    CHECK(*overridden.params.rate.D_B == 12.0);
    CHECK(overridden.params.rate.diffusion()[1] == 12.0);
    CHECK(overridden.params.rate.diffusion()[0] == doctest::Approx(7200.0).epsilon(1e-15));
}

TEST_CASE("config unknown keys are all listed") {
    try {
        parse_config(R"({"geometry": {"t": "a", "t1": "b", "tt": 1}, "solvers": {}, "params": {"rho_X": 1}})");
        FAIL("expected Error");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("geometry.tt") != std::string::npos);
        CHECK(msg.find("solvers") != std::string::npos);
        CHECK(msg.find("params.rho_X") != std::string::npos);
    }
}

TEST_CASE("config rejects bad mode, types, and ranges") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"mode": "model3", "geometry": {"t": "a", "t1": "b"}})"),
                         doctest::Contains("mode"), Error);
    CHECK_THROWS_WITH_AS(parse_config(R"({"geometry": {"t1": "b"}})"), doctest::Contains("geometry.t"), Error);
    CHECK_THROWS_WITH_AS(parse_config(R"({"geometry": {"t": "a", "t1": "b"}, "solver": {"dt": "fast"}})"),
                         doctest::Contains("solver.dt"), Error);
    CHECK_THROWS_WITH_AS(parse_config(R"({"geometry": {"t": "a", "t1": "b"}, "solver": {"dt": -1}})"),
                         doctest::Contains("solver"), Error);
    CHECK_THROWS_WITH_AS(parse_config(R"({"geometry": {"t": "a", "t1": "b"}, "params": {"rho_A": -2}})"),
                         doctest::Contains("params"), Error);
    CHECK_THROWS_WITH_AS(parse_config("not json at all"), doctest::Contains("<config>"), Error);
    CHECK_THROWS_WITH_AS(parse_config(R"({"geometry": {"t": "a", "t1": "b"}, "output": {"snapshot_every": -1}})"),
                         doctest::Contains("snapshot_every"), Error);
}

TEST_CASE("config model1 defaults to lenient meshes unless overridden") {
    const char* base = R"({"mode": "model1", "geometry": {"t": "a", "t1": "b"}})";
    CHECK(!parse_config(base).solver.strict_mesh);
    const char* strict = R"({"mode": "model1", "geometry": {"t": "a", "t1": "b"},
                             "solver": {"strict_mesh": true}})";
    CHECK(parse_config(strict).solver.strict_mesh);
}

TEST_CASE("config_to_json round-trips through parse_config") {
    const RunConfig cfg = parse_config(
        R"({"mode": "model1",
            "geometry": {"t": "a.csv", "t1": "b.csv", "n_points_per_segment": 48, "target_edge_length": 0.05},
            "solver": {"dt": 0.025, "t_end": 2.0, "picard_tol": 1e-9},
            "params": {"T": 1800, "rho_C": 40.0, "D_C": 900.0, "K_AC": 0.03},
            "output": {"dir": "results", "snapshot_every": 5}})");
    const RunConfig back = parse_config(config_to_json(cfg));
    CHECK(back.mode == cfg.mode);
    CHECK(back.geometry_t == cfg.geometry_t);
    CHECK(back.geometry_t1 == cfg.geometry_t1);
    CHECK(back.n_points_per_segment == cfg.n_points_per_segment);
    CHECK(back.target_edge_length == cfg.target_edge_length);
    CHECK(back.solver.dt == cfg.solver.dt);
    CHECK(back.solver.t_end == cfg.solver.t_end);
    CHECK(back.solver.picard_tol == cfg.solver.picard_tol);
    CHECK(back.solver.strict_mesh == cfg.solver.strict_mesh);
    CHECK(back.T == cfg.T);
    CHECK(back.L == cfg.L);
    CHECK(back.params.rate.rho_A == cfg.params.rate.rho_A);
    CHECK(back.params.rate.rho_C == cfg.params.rate.rho_C);
    CHECK(back.params.rate.D_C == cfg.params.rate.D_C);
    CHECK(back.params.hill.K_AC == cfg.params.hill.K_AC);
    CHECK(back.output_dir == cfg.output_dir);
    CHECK(back.snapshot_every == cfg.snapshot_every);
}

TEST_CASE("load_config resolves geometry paths relative to the file") {
    const auto dir = temp_dir() / "cfgdir";
    std::filesystem::create_directories(dir);
    const auto [t0, t1] = generate_fixture(1.0);
    write_geometry(t0, (dir / "stage_t.csv").string());
    write_geometry(t1, (dir / "stage_t1.csv").string());
    const auto cfg_path = (dir / "run.json").string();
    std::ofstream(cfg_path) << R"({"geometry": {"t": "stage_t.csv", "t1": "stage_t1.csv"}})";

    const RunConfig cfg = load_config(cfg_path);
    CHECK(std::filesystem::exists(cfg.geometry_t));
    CHECK(std::filesystem::exists(cfg.geometry_t1));
    check_geometry_equal(t0, read_geometry(cfg.geometry_t));

    std::ofstream(cfg_path) << R"({"geometry": {"t": "missing.csv", "t1": "stage_t1.csv"}})";
    CHECK_THROWS_WITH_AS(load_config(cfg_path), doctest::Contains("missing.csv"), Error);
    CHECK_THROWS_AS(load_config((dir / "nope.json").string()), Error);
}

TEST_CASE("fixture stages carry four interior junctions and plausible growth") {
    const auto [t0, t1] = generate_fixture(1.0);
    for (const StagedGeometry* g : {&t0, &t1}) {
        const auto seg = segment_at_intersections(*g);
        std::size_t interior = 0;
        for (const auto& j : seg.junctions)
            if (j.interior) {
                ++interior;
                CHECK(j.incidences.size() == 2);
            }
        CHECK(interior == 4);

        double covered = 0.0;
        for (const auto& [label, pieces] : g->subdomains)
            covered += std::abs(polygon_area(subdomain_loop_polygon(*g, label)));
        const double outer = std::abs(polygon_area(outer_boundary_polygon(*g)));
        CHECK(covered == doctest::Approx(outer).epsilon(1e-9));
    }
    const double a0 = std::abs(polygon_area(outer_boundary_polygon(t0)));
    const double a1 = std::abs(polygon_area(outer_boundary_polygon(t1)));
    CHECK(a1 / a0 > 1.2);
    CHECK(a1 / a0 < 1.4);
}
