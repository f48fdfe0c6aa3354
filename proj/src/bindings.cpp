#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "growfem/config.hpp"
#include "growfem/displacement.hpp"
#include "growfem/error.hpp"
#include "growfem/fixture.hpp"
#include "growfem/geometry.hpp"
#include "growfem/io.hpp"
#include "growfem/kinetics.hpp"
#include "growfem/mesh.hpp"
#include "growfem/solver.hpp"

namespace py = pybind11;
using namespace growfem;

namespace {

Eigen::MatrixX2d nodes_matrix(const Mesh& mesh) {
    Eigen::MatrixX2d out(long(mesh.nodes.size()), 2);
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        out(long(i), 0) = mesh.nodes[i].x;
        out(long(i), 1) = mesh.nodes[i].y;
    }
    return out;
}

Eigen::MatrixX3i triangles_matrix(const Mesh& mesh) {
    Eigen::MatrixX3i out(long(mesh.triangles.size()), 3);
    for (std::size_t e = 0; e < mesh.triangles.size(); ++e)
        for (int k = 0; k < 3; ++k)
            out(long(e), k) = mesh.triangles[e][std::size_t(k)];
    return out;
}

} // namespace

PYBIND11_MODULE(_growfem, m) {
    m.doc() = "Finite-element simulation of reaction-diffusion systems on growing 2D domains";

    py::register_exception<Error>(m, "GrowfemError");

    py::class_<Point2>(m, "Point2")
        .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
        .def_readwrite("x", &Point2::x)
        .def_readwrite("y", &Point2::y)
        .def("__repr__", [](const Point2& p) { return "Point2(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")"; });

    py::class_<Curve>(m, "Curve")
        .def(py::init<>())
        .def_readwrite("id", &Curve::id)
        .def_readwrite("points", &Curve::points)
        .def_readwrite("closed", &Curve::closed);

    py::class_<LoopPiece>(m, "LoopPiece")
        .def(py::init<>())
        .def_readwrite("curve_id", &LoopPiece::curve_id)
        .def_readwrite("orientation", &LoopPiece::orientation)
        .def_readwrite("s0", &LoopPiece::s0)
        .def_readwrite("s1", &LoopPiece::s1);

    py::class_<StagedGeometry>(m, "StagedGeometry")
        .def(py::init<>())
        .def_readwrite("stage_time", &StagedGeometry::stage_time)
        .def_readwrite("curves", &StagedGeometry::curves)
        .def_readwrite("subdomains", &StagedGeometry::subdomains);

    py::class_<CurveSegment>(m, "CurveSegment")
        .def_readonly("parent_id", &CurveSegment::parent_id)
        .def_readonly("segment_index", &CurveSegment::segment_index)
        .def_readonly("points", &CurveSegment::points)
        .def_readonly("start_is_junction", &CurveSegment::start_is_junction)
        .def_readonly("end_is_junction", &CurveSegment::end_is_junction);

    py::class_<JunctionRecord>(m, "JunctionRecord")
        .def_readonly("point", &JunctionRecord::point)
        .def_readonly("incidences", &JunctionRecord::incidences)
        .def_readonly("interior", &JunctionRecord::interior);

    py::class_<SegmentedGeometry>(m, "SegmentedGeometry")
        .def_readonly("segments", &SegmentedGeometry::segments)
        .def_readonly("junctions", &SegmentedGeometry::junctions)
        .def_property_readonly("source", [](const SegmentedGeometry& s) { return s.source; });

    m.def("resample_uniform", &resample_uniform, py::arg("curve"), py::arg("n"));
    m.def("curve_length", &curve_length);
    m.def("segment_at_intersections", &segment_at_intersections, py::arg("geometry"),
          py::arg("tol") = kIntersectionTol);
    m.def("polygon_area", &polygon_area);
    m.def("subdomain_loop_polygon", &subdomain_loop_polygon, py::arg("geometry"), py::arg("subdomain_id"),
          py::arg("tol") = 1e-7);
    m.def("outer_boundary_polygon", &outer_boundary_polygon, py::arg("geometry"), py::arg("tol") = 1e-7);
    m.def("generate_fixture", &generate_fixture, py::arg("deformation_scale"));

    py::enum_<Keying>(m, "Keying").value("parameter", Keying::Parameter).value("coordinate", Keying::Coordinate);
    py::enum_<Mode>(m, "Mode").value("model1", Mode::Model1).value("model2", Mode::Model2);

    py::class_<DisplacementField>(m, "DisplacementField")
        .def_readonly("parent_id", &DisplacementField::parent_id)
        .def_readonly("segment_index", &DisplacementField::segment_index)
        .def_readonly("keying", &DisplacementField::keying)
        .def_readonly("closed", &DisplacementField::closed)
        .def_property_readonly("rows",
                               [](const DisplacementField& f) {
                                   std::vector<std::tuple<double, double, double, double>> out;
                                   for (const auto& r : f.rows)
                                       out.emplace_back(r.key1, r.key2, r.dx, r.dy);
                                   return out;
                               })
        .def_property_readonly("segment_id", &DisplacementField::segment_id);

    m.def("build_segment_fields", &build_segment_fields, py::arg("t0"), py::arg("t1"), py::arg("n_per_segment"),
          py::arg("keying") = Keying::Parameter);
    m.def("build_whole_curve_fields", &build_whole_curve_fields, py::arg("t0"), py::arg("t1"),
          py::arg("n_per_curve"), py::arg("keying") = Keying::Parameter);

    py::class_<StageFields>(m, "StageFields")
        .def(py::init<>())
        .def_readwrite("segment_fields", &StageFields::segment_fields)
        .def_readwrite("curve_fields", &StageFields::curve_fields)
        .def_readwrite("whole_curve", &StageFields::whole_curve);

    py::class_<QualityReport>(m, "QualityReport")
        .def_readonly("per_element_quality", &QualityReport::per_element_quality)
        .def_readonly("min_quality", &QualityReport::min_quality)
        .def_readonly("inverted_count", &QualityReport::inverted_count);

    py::class_<Mesh>(m, "Mesh")
        .def_property_readonly("nodes", &nodes_matrix)
        .def_property_readonly("triangles", &triangles_matrix)
        .def_readonly("element_labels", &Mesh::element_labels)
        .def_readonly("junction_nodes", &Mesh::junction_nodes)
        .def_property_readonly("n_nodes", [](const Mesh& m_) { return m_.nodes.size(); })
        .def_property_readonly("n_elements", [](const Mesh& m_) { return m_.triangles.size(); });

    m.def("triangulate", &triangulate, py::arg("geometry"), py::arg("target_edge_length") = 0.0);
    m.def("quality_report", &quality_report);
    m.def("labeled_areas", &labeled_areas);
    m.def(
        "move_mesh",
        [](const Mesh& mesh, const StageFields& fields, double fraction) {
            double violation = 0.0;
            Mesh moved = move_mesh(mesh, fields, fraction, &violation);
            return py::make_tuple(std::move(moved), violation);
        },
        py::arg("mesh"), py::arg("fields"), py::arg("fraction"),
        "Returns (moved_mesh, max_principle_violation).");

    py::class_<HillParams>(m, "HillParams")
        .def(py::init<>())
        .def_readwrite("K_BA", &HillParams::K_BA)
        .def_readwrite("K_AB", &HillParams::K_AB)
        .def_readwrite("K_CB", &HillParams::K_CB)
        .def_readwrite("K_AC", &HillParams::K_AC);

    py::class_<RateParams>(m, "RateParams")
        .def(py::init<>())
        .def_readwrite("rho_A", &RateParams::rho_A)
        .def_readwrite("rho_B", &RateParams::rho_B)
        .def_readwrite("rho_C", &RateParams::rho_C)
        .def_readwrite("d_A", &RateParams::d_A)
        .def_readwrite("d_B", &RateParams::d_B)
        .def_readwrite("d_C", &RateParams::d_C)
        .def_readwrite("D", &RateParams::D_diff)
        .def_readwrite("D_A", &RateParams::D_A)
        .def_readwrite("D_B", &RateParams::D_B)
        .def_readwrite("D_C", &RateParams::D_C);

    py::class_<Params>(m, "Params")
        .def(py::init<>())
        .def_readwrite("rate", &Params::rate)
        .def_readwrite("hill", &Params::hill);

    py::class_<NetworkSpec>(m, "NetworkSpec")
        .def(py::init<>())
        .def_readwrite("subdomains", &NetworkSpec::subdomains)
        .def_readwrite("production_region_A", &NetworkSpec::production_region_A)
        .def_readwrite("production_region_C", &NetworkSpec::production_region_C)
        .def_readwrite("initial_region_A", &NetworkSpec::initial_region_A)
        .def_readwrite("initial_value_A", &NetworkSpec::initial_value_A);

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("dt", &SolverConfig::dt)
        .def_readwrite("t_end", &SolverConfig::t_end)
        .def_readwrite("picard_tol", &SolverConfig::picard_tol)
        .def_readwrite("picard_max_iters", &SolverConfig::picard_max_iters)
        .def_readwrite("linear_solver_tol", &SolverConfig::linear_solver_tol)
        .def_readwrite("strict_mesh", &SolverConfig::strict_mesh);

    m.def("hill_act", &hill_act, py::arg("x"), py::arg("K"));
    m.def("hill_inh", &hill_inh, py::arg("x"), py::arg("K"));

    py::class_<StageResult>(m, "StageResult")
        .def_readonly("times", &StageResult::times)
        .def_readonly("areas", &StageResult::areas)
        .def_readonly("total_areas", &StageResult::total_areas)
        .def_readonly("max_principle_violation", &StageResult::max_principle_violation)
        .def_readonly("min_concentration", &StageResult::min_concentration)
        .def_property_readonly("quality",
                               [](const StageResult& r) {
                                   std::vector<std::pair<double, int>> out;
                                   for (const auto& q : r.quality)
                                       out.emplace_back(q.min_quality, q.inverted_count);
                                   return out;
                               })
        .def_property_readonly("final_mesh", [](const StageResult& r) { return *r.final_state.mesh; })
        .def_property_readonly("final_time", [](const StageResult& r) { return r.final_state.time; })
        .def(
            "final_concentration",
            [](const StageResult& r, int species) {
                if (species < 0 || species > 2)
                    throw Error("species index must be 0 (A), 1 (B), or 2 (C)");
                return r.final_state.c[std::size_t(species)];
            },
            py::arg("species"))
        .def(
            "final_production",
            [](const StageResult& r, int species) {
                if (species < 0 || species > 2)
                    throw Error("species index must be 0 (A), 1 (B), or 2 (C)");
                return r.final_production[std::size_t(species)];
            },
            py::arg("species"));

    m.def(
        "run_stage",
        [](const StagedGeometry& t0, const StagedGeometry& t1, Mode mode, const NetworkSpec& net,
           const Params& params, const SolverConfig& cfg, int n_points_per_segment, double target_edge_length) {
            return run_stage(t0, t1, net, params, cfg, mode, n_points_per_segment, target_edge_length);
        },
        py::arg("geometry_t"), py::arg("geometry_t1"), py::arg("mode") = Mode::Model2,
        py::arg("network") = NetworkSpec{}, py::arg("params") = Params{}, py::arg("solver") = SolverConfig{},
        py::arg("n_points_per_segment") = 100, py::arg("target_edge_length") = 0.0);

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("geometry_t", &RunConfig::geometry_t)
        .def_readwrite("geometry_t1", &RunConfig::geometry_t1)
        .def_readwrite("mode", &RunConfig::mode)
        .def_readwrite("solver", &RunConfig::solver)
        .def_readwrite("params", &RunConfig::params)
        .def_readwrite("network", &RunConfig::network)
        .def_readwrite("T", &RunConfig::T)
        .def_readwrite("L", &RunConfig::L)
        .def_readwrite("output_dir", &RunConfig::output_dir)
        .def_readwrite("n_points_per_segment", &RunConfig::n_points_per_segment)
        .def_readwrite("target_edge_length", &RunConfig::target_edge_length)
        .def_readwrite("snapshot_every", &RunConfig::snapshot_every);

    m.def("parse_config", &parse_config, py::arg("json_text"), py::arg("source_name") = "<config>");
    m.def("load_config", &load_config, py::arg("path"));
    m.def("config_to_json", &config_to_json, py::arg("config"));

    m.def("write_geometry", &write_geometry, py::arg("geometry"), py::arg("csv_path"));
    m.def("read_geometry", &read_geometry, py::arg("csv_path"));
    m.def("write_displacement_csv", &write_displacement_csv, py::arg("fields"), py::arg("path"));
    m.def("read_displacement_csv", &read_displacement_csv, py::arg("path"));
    m.def("format_double", &format_double, py::arg("value"));
}
