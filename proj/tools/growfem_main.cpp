#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "growfem/config.hpp"
#include "growfem/displacement.hpp"
#include "growfem/error.hpp"
#include "growfem/fixture.hpp"
#include "growfem/io.hpp"
#include "growfem/mesh.hpp"
#include "growfem/solver.hpp"

namespace {

using namespace growfem;

std::string snapshot_name(const char* prefix, int step, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%04d.%s", prefix, step, ext);
    return buf;
}

Mode parse_mode(const std::string& mode) {
    if (mode == "model1")
        return Mode::Model1;
    if (mode == "model2")
        return Mode::Model2;
    throw Error("mode: expected \"model1\" or \"model2\", got \"" + mode + "\"");
}

struct SimulateArgs {
    std::string config_path;
    std::string mode;
    std::string out;
    std::optional<bool> strict_mesh;
    int seed = 0; // reserved; runs are deterministic
};

int run_simulate(const SimulateArgs& args) {
    RunConfig cfg = load_config(args.config_path);
    if (!args.mode.empty()) {
        cfg.mode = parse_mode(args.mode);
        // A mode switched on the command line re-applies that mode's
        // strict_mesh default; --strict-mesh / --no-strict-mesh still wins.
        if (!args.strict_mesh)
            cfg.solver.strict_mesh = cfg.mode == Mode::Model2;
    }
    if (args.strict_mesh)
        cfg.solver.strict_mesh = *args.strict_mesh;
    if (!args.out.empty())
        cfg.output_dir = args.out;

    const StagedGeometry t0 = read_geometry(cfg.geometry_t);
    const StagedGeometry t1 = read_geometry(cfg.geometry_t1);

    const std::filesystem::path out_dir(cfg.output_dir);
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream f(out_dir / "config.json", std::ios::binary);
        if (!f)
            throw Error("cannot open for writing: " + (out_dir / "config.json").string());
        f << config_to_json(cfg);
    }

    std::vector<std::string> labels;
    for (const auto& [label, pieces] : t0.subdomains)
        labels.push_back(label);
    AreasWriter areas((out_dir / "areas.csv").string(), labels);
    QualityWriter quality((out_dir / "quality.csv").string());

    const int n_steps = std::max(1, int(std::ceil(cfg.solver.t_end / cfg.solver.dt - 1e-9)));
    int recorded = 0;
    const auto on_step = [&](int step, const SolverState& state, const QualityReport& report,
                             const std::array<Eigen::VectorXd, 3>& production) {
        std::map<std::string, double> by_label = labeled_areas(*state.mesh);
        double total = 0.0;
        for (const auto& [label, area] : by_label)
            total += area;
        areas.append(step, state.time, by_label, total);
        quality.append(step, report);
        const bool snapshot = step == 0 || step == n_steps ||
                              (cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0);
        if (snapshot) {
            write_fields_csv(*state.mesh, state.c, production,
                             (out_dir / snapshot_name("fields", step, "csv")).string());
            if (cfg.snapshot_every > 0)
                write_vtk(*state.mesh, state.c, production, (out_dir / snapshot_name("snap", step, "vtk")).string());
        }
        ++recorded;
    };

    const StageResult result = run_stage(t0, t1, cfg.network, cfg.params, cfg.solver, cfg.mode,
                                         cfg.n_points_per_segment, cfg.target_edge_length, on_step);

    std::cout << "steps: " << result.times.size() - 1 << "\n";
    std::cout << "final time: " << format_double(result.times.back()) << "\n";
    std::cout << "final total area: " << format_double(result.total_areas.back()) << "\n";
    int worst_inverted = 0;
    for (const auto& q : result.quality)
        worst_inverted = std::max(worst_inverted, q.inverted_count);
    std::cout << "max inverted elements: " << worst_inverted << "\n";
    std::cout << "max principle violation: " << format_double(result.max_principle_violation) << "\n";
    std::cout << "min concentration: " << format_double(result.min_concentration) << "\n";
    std::cout << "output: " << out_dir.string() << " (" << recorded << " recorded steps)\n";
    return 0;
}

int run_segment(const std::string& geometry_path, const std::string& out_path) {
    const StagedGeometry g = read_geometry(geometry_path);
    const SegmentedGeometry seg = segment_at_intersections(g);
    write_segments_csv(seg, out_path);
    std::size_t n_segments = 0;
    for (const auto& [parent, segs] : seg.segments)
        n_segments += segs.size();
    std::size_t interior = 0;
    for (const auto& j : seg.junctions)
        interior += j.interior;
    std::cout << "curves: " << seg.segments.size() << "\nsegments: " << n_segments
              << "\ninterior junctions: " << interior << "\nwrote " << out_path << "\n";
    return 0;
}

int run_displace(const std::string& t_path, const std::string& t1_path, const std::string& out_path,
                 const std::string& mode, int n_points, const std::string& keying_name) {
    const StagedGeometry t0 = read_geometry(t_path);
    const StagedGeometry t1 = read_geometry(t1_path);
    const Keying keying = keying_name == "coordinate" ? Keying::Coordinate : Keying::Parameter;

    std::vector<DisplacementField> fields;
    if (parse_mode(mode) == Mode::Model2) {
        const auto seg0 = segment_at_intersections(t0);
        const auto seg1 = segment_at_intersections(t1);
        for (auto& [key, field] : build_segment_fields(seg0, seg1, n_points, keying))
            fields.push_back(std::move(field));
    } else {
        for (auto& [curve, field] : build_whole_curve_fields(t0, t1, n_points, keying))
            fields.push_back(std::move(field));
    }
    write_displacement_csv(fields, out_path);
    std::cout << "fields: " << fields.size() << "\nwrote " << out_path << "\n";
    return 0;
}

int run_mesh_report(const std::string& geometry_path, const std::string& out_path, double target_edge_length) {
    const StagedGeometry g = read_geometry(geometry_path);
    const SegmentedGeometry seg = segment_at_intersections(g);
    const Mesh mesh = triangulate(seg, target_edge_length);
    const QualityReport report = quality_report(mesh);

    QualityWriter writer(out_path);
    writer.append(0, report);

    std::cout << "nodes: " << mesh.nodes.size() << "\nelements: " << mesh.triangles.size() << "\n";
    for (const auto& [label, area] : labeled_areas(mesh))
        std::cout << "area " << label << ": " << format_double(area) << "\n";
    std::cout << "min quality: " << format_double(report.min_quality)
              << "\ninverted elements: " << report.inverted_count << "\nwrote " << out_path << "\n";
    return 0;
}

int run_fixture(const std::string& out_dir_path, double scale) {
    const auto [t0, t1] = generate_fixture(scale);
    const std::filesystem::path dir(out_dir_path);
    std::filesystem::create_directories(dir);
    write_geometry(t0, (dir / "stage_t.csv").string());
    write_geometry(t1, (dir / "stage_t1.csv").string());

    RunConfig cfg;
    cfg.geometry_t = "stage_t.csv";
    cfg.geometry_t1 = "stage_t1.csv";
    std::ofstream f(dir / "config.json", std::ios::binary);
    if (!f)
        throw Error("cannot open for writing: " + (dir / "config.json").string());
    f << config_to_json(cfg);
    std::cout << "wrote " << (dir / "stage_t.csv").string() << ", " << (dir / "stage_t1.csv").string() << ", "
              << (dir / "config.json").string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reaction-diffusion on growing segmented domains"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run one growth stage and write CSV outputs");
    simulate->add_option("--config", sim.config_path, "JSON config file")->required();
    simulate->add_option("--mode", sim.mode, "Override mode: model1 or model2")
        ->check(CLI::IsMember({"model1", "model2"}));
    simulate->add_option("--out", sim.out, "Override output directory");
    simulate->add_option("--seed", sim.seed, "Reserved; accepted for interface stability");
    simulate->add_flag(
        "--strict-mesh,!--no-strict-mesh",
        [&sim](std::int64_t count) { sim.strict_mesh = count > 0; },
        "Abort on inverted elements (default: strict for model2, lenient for model1)");

    std::string seg_geometry, seg_out = "segments.csv";
    auto* segment = app.add_subcommand("segment", "Split curves at intersections and write segments CSV");
    segment->add_option("--geometry", seg_geometry, "Geometry CSV (with JSON sidecar)")->required();
    segment->add_option("--out", seg_out, "Output CSV path");

    std::string disp_t, disp_t1, disp_out = "displacement.csv", disp_mode = "model2", disp_keying = "parameter";
    int disp_n = 100;
    auto* displace = app.add_subcommand("displace", "Build displacement fields between two stages");
    displace->add_option("--t", disp_t, "Stage t geometry CSV")->required();
    displace->add_option("--t1", disp_t1, "Stage t+1 geometry CSV")->required();
    displace->add_option("--out", disp_out, "Output CSV path");
    displace->add_option("--mode", disp_mode, "model2: per-segment fields; model1: whole-curve fields")
        ->check(CLI::IsMember({"model1", "model2"}));
    displace->add_option("--n-points", disp_n, "Samples per field")->check(CLI::PositiveNumber);
    displace->add_option("--keying", disp_keying, "parameter or coordinate")
        ->check(CLI::IsMember({"parameter", "coordinate"}));

    std::string mesh_geometry, mesh_out = "quality.csv";
    double mesh_target = 0.0;
    auto* mesh_report = app.add_subcommand("mesh-report", "Triangulate a stage and report mesh quality");
    mesh_report->add_option("--geometry", mesh_geometry, "Geometry CSV (with JSON sidecar)")->required();
    mesh_report->add_option("--out", mesh_out, "Output CSV path");
    mesh_report->add_option("--target-edge-length", mesh_target, "0 picks bbox_diagonal / 30")
        ->check(CLI::NonNegativeNumber);

    std::string fixture_out;
    double fixture_scale = 1.0;
    auto* fixture = app.add_subcommand("fixture", "Write the built-in two-stage example geometry");
    fixture->add_option("--out", fixture_out, "Output directory")->required();
    fixture->add_option("--scale", fixture_scale, "Deformation scale in (0, 2]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*simulate)
            return run_simulate(sim);
        if (*segment)
            return run_segment(seg_geometry, seg_out);
        if (*displace)
            return run_displace(disp_t, disp_t1, disp_out, disp_mode, disp_n, disp_keying);
        if (*mesh_report)
            return run_mesh_report(mesh_geometry, mesh_out, mesh_target);
        if (*fixture)
            return run_fixture(fixture_out, fixture_scale);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
