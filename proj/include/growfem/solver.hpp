#pragma once

#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "growfem/kinetics.hpp"
#include "growfem/mesh.hpp"

namespace growfem {

struct SolverConfig {
    double dt = 0.01;
    double t_end = 1.0;
    double picard_tol = 1e-10;
    int picard_max_iters = 50;
    double linear_solver_tol = 1e-12;
    bool strict_mesh = true;

    void validate() const;
};

/// Nodal concentrations in species order A, B, C on the referenced mesh.
struct SolverState {
    std::array<Eigen::VectorXd, 3> c;
    double time = 0.0;
    std::shared_ptr<const Mesh> mesh;
};

struct Assembled {
    Eigen::SparseMatrix<double> M; // consistent P1 mass
    Eigen::SparseMatrix<double> K; // P1 stiffness, zero-flux natural BC
};

/// Signed-area P1 assembly. strict refuses inverted elements by name;
/// lenient assembles them as-is (their signed contributions included).
Assembled assemble(const Mesh& mesh, bool strict = true);

/// Mass matrices restricted to each subdomain label (integrals over the
/// labeled elements only); realizes the crisp production indicators.
std::map<std::string, Eigen::SparseMatrix<double>> assemble_label_masses(const Mesh& mesh, bool strict = true);

struct StepDiagnostics {
    int picard_iters = 0;
    double picard_residual = 0.0;
    double min_concentration = 0.0;
};

/// One implicit-Euler step of the conservative moving-mass-matrix scheme,
/// from state.mesh to mesh_next, Picard iteration on the reaction terms.
SolverState step(const SolverState& state, std::shared_ptr<const Mesh> mesh_next, double dt, const NetworkSpec& net,
                 const Params& params, const SolverConfig& cfg, StepDiagnostics* diag = nullptr);

/// Nodal initial condition: A = initial_value_A on nodes touching elements of
/// the initial region, B = C = 0.
SolverState initial_state(std::shared_ptr<const Mesh> mesh, const NetworkSpec& net);

/// Nodal effective production fields for the state's labels. A node shared by
/// differently labeled elements takes the label carried by most incident
/// elements (ties broken lexicographically).
std::array<Eigen::VectorXd, 3> nodal_production(const SolverState& state, const NetworkSpec& net, const Params& params);

enum class Mode { Model1, Model2 };

struct StageResult {
    std::vector<double> times;                           // per recorded step
    std::vector<std::map<std::string, double>> areas;    // label -> area
    std::vector<double> total_areas;
    std::vector<QualityReport> quality;
    std::vector<StepDiagnostics> diagnostics;
    SolverState final_state;
    std::array<Eigen::VectorXd, 3> final_production;
    double max_principle_violation = 0.0;
    double min_concentration = 0.0;
};

/// Called after each recorded step (and once for the initial state, step 0).
using StepCallback =
    std::function<void(int step, const SolverState& state, const QualityReport& quality,
                       const std::array<Eigen::VectorXd, 3>& production)>;

/// Full pipeline on a stage pair: segmentation, displacement fields
/// (per-segment in Model2, whole-curve in Model1), triangulation of the
/// stage-t geometry, then the time loop with the boundary ramped linearly to
/// its stage-(t+1) position.
StageResult run_stage(const StagedGeometry& geometry_t, const StagedGeometry& geometry_t1, const NetworkSpec& net,
                      const Params& params, const SolverConfig& cfg, Mode mode, int n_points_per_segment = 100,
                      double target_edge_length = 0.0, const StepCallback& on_step = nullptr);

} // namespace growfem
