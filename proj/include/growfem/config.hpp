#pragma once

#include <string>

#include "growfem/kinetics.hpp"
#include "growfem/solver.hpp"

namespace growfem {

/// One config document drives a whole run. Unset rate parameters derive from
/// the characteristic time T (rho_A = 1e-4*T, rho_B = 5e-3*T, rho_C = 2e-2*T,
/// d_* = 1e-6*T, D = 1*T); L is carried as metadata only.
struct RunConfig {
    std::string geometry_t;
    std::string geometry_t1;
    Mode mode = Mode::Model2;
    SolverConfig solver;
    Params params;
    NetworkSpec network;
    double T = 3600.0;
    double L = 150.0;
    std::string output_dir = "out";
    int n_points_per_segment = 100;
    double target_edge_length = 0.0; // 0 picks bbox_diagonal / 30
    int snapshot_every = 0;          // 0 disables VTK snapshots
};

/// Parses and validates a JSON config document. Unknown keys are errors and
/// are listed in the message; missing parameters take the documented defaults.
RunConfig parse_config(const std::string& json_text, const std::string& source_name = "<config>");
RunConfig load_config(const std::string& path);

std::string config_to_json(const RunConfig& cfg);

} // namespace growfem
