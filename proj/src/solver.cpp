#include "growfem/solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "growfem/error.hpp"

namespace growfem {

void SolverConfig::validate() const {
    if (!(dt > 0))
        throw Error("solver config: dt must be positive");
    if (!(t_end >= dt))
        throw Error("solver config: t_end must be at least dt");
    if (!(picard_tol > 0) || !(linear_solver_tol > 0))
        throw Error("solver config: tolerances must be positive");
    if (picard_max_iters < 1)
        throw Error("solver config: picard_max_iters must be at least 1");
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

void add_element(std::vector<Eigen::Triplet<double>>& mass, std::vector<Eigen::Triplet<double>>* stiffness,
                 const Mesh& mesh, std::size_t e) {
    const auto& t = mesh.triangles[e];
    const Point2& a = mesh.nodes[std::size_t(t[0])];
    const Point2& b = mesh.nodes[std::size_t(t[1])];
    const Point2& c = mesh.nodes[std::size_t(t[2])];
    const double area2 = cross(b - a, c - a); // signed, positive when upright
    const double m_off = area2 / 24.0;
    for (int r = 0; r < 3; ++r)
        for (int s = 0; s < 3; ++s)
            mass.emplace_back(t[std::size_t(r)], t[std::size_t(s)], r == s ? 2.0 * m_off : m_off);
    if (stiffness) {
        const Point2 edge[3] = {c - b, a - c, b - a}; // opposite each vertex
        for (int r = 0; r < 3; ++r)
            for (int s = 0; s < 3; ++s)
                stiffness->emplace_back(t[std::size_t(r)], t[std::size_t(s)],
                                        dot(edge[r], edge[s]) / (2.0 * area2));
    }
}

void check_orientation(const Mesh& mesh, bool strict) {
    if (!strict)
        return;
    for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
        const auto& t = mesh.triangles[e];
        const Point2& a = mesh.nodes[std::size_t(t[0])];
        const Point2& b = mesh.nodes[std::size_t(t[1])];
        const Point2& c = mesh.nodes[std::size_t(t[2])];
        if (cross(b - a, c - a) <= 0)
            throw Error("assemble: element " + std::to_string(e) + " is inverted or degenerate");
    }
}

// Direct solver with an LDLT fast path and an LU fallback for the indefinite
// systems a tangled mesh produces. The contract is the residual.
class LinearSolve {
public:
    explicit LinearSolve(SpMat A) : A_(std::move(A)), a_norm_(A_.norm()) {
        ldlt_.compute(A_);
        ldlt_ok_ = ldlt_.info() == Eigen::Success;
    }

    // Accepts a solution when the backward error ||Ax-b|| / (||A|| ||x|| + ||b||)
    // meets rel_tol; one refinement pass covers ill-conditioned but solvable
    // systems, the LU fallback covers the indefinite ones a tangled mesh makes.
    Eigen::VectorXd solve(const Eigen::VectorXd& b, double rel_tol) {
        if (ldlt_ok_) {
            Eigen::VectorXd x = ldlt_.solve(b);
            if (ldlt_.info() == Eigen::Success) {
                x += ldlt_.solve(b - A_ * x);
                if (backward_error(x, b) <= rel_tol)
                    return x;
            }
        }
        if (!lu_) {
            lu_ = std::make_unique<Eigen::SparseLU<SpMat>>();
            lu_->compute(A_);
            lu_ok_ = lu_->info() == Eigen::Success;
        }
        if (lu_ok_) {
            Eigen::VectorXd x = lu_->solve(b);
            if (lu_->info() == Eigen::Success) {
                x += lu_->solve(b - A_ * x);
                if (backward_error(x, b) <= rel_tol)
                    return x;
            }
        }
        throw Error("step: linear system is singular or lost accuracy beyond the residual tolerance");
    }

private:
    double backward_error(const Eigen::VectorXd& x, const Eigen::VectorXd& b) const {
        return (A_ * x - b).norm() / std::max(a_norm_ * x.norm() + b.norm(), 1e-300);
    }

    SpMat A_;
    double a_norm_ = 0.0;
    Eigen::SimplicialLDLT<SpMat> ldlt_;
    bool ldlt_ok_ = false;
    std::unique_ptr<Eigen::SparseLU<SpMat>> lu_;
    bool lu_ok_ = false;
};

// Majority label of the elements incident to each node, ties to the
// lexicographically smaller label.
std::vector<std::string> node_labels(const Mesh& mesh) {
    std::vector<std::map<std::string, int>> counts(mesh.nodes.size());
    for (std::size_t e = 0; e < mesh.triangles.size(); ++e)
        for (const int v : mesh.triangles[e])
            ++counts[std::size_t(v)][mesh.element_labels[e]];
    std::vector<std::string> labels(mesh.nodes.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        int best = -1;
        for (const auto& [label, count] : counts[i])
            if (count > best) {
                best = count;
                labels[i] = label;
            }
        if (best < 0)
            throw Error("mesh has a node with no incident elements");
    }
    return labels;
}

} // namespace

Assembled assemble(const Mesh& mesh, bool strict) {
    check_orientation(mesh, strict);
    const int n = int(mesh.nodes.size());
    std::vector<Eigen::Triplet<double>> mass, stiffness;
    mass.reserve(mesh.triangles.size() * 9);
    stiffness.reserve(mesh.triangles.size() * 9);
    for (std::size_t e = 0; e < mesh.triangles.size(); ++e)
        add_element(mass, &stiffness, mesh, e);
    Assembled out;
    out.M.resize(n, n);
    out.M.setFromTriplets(mass.begin(), mass.end());
    out.K.resize(n, n);
    out.K.setFromTriplets(stiffness.begin(), stiffness.end());
    return out;
}

std::map<std::string, SpMat> assemble_label_masses(const Mesh& mesh, bool strict) {
    check_orientation(mesh, strict);
    const int n = int(mesh.nodes.size());
    std::map<std::string, std::vector<Eigen::Triplet<double>>> triplets;
    for (std::size_t e = 0; e < mesh.triangles.size(); ++e)
        add_element(triplets[mesh.element_labels[e]], nullptr, mesh, e);
    std::map<std::string, SpMat> out;
    for (auto& [label, trip] : triplets) {
        SpMat m(n, n);
        m.setFromTriplets(trip.begin(), trip.end());
        out.emplace(label, std::move(m));
    }
    return out;
}

SolverState step(const SolverState& state, std::shared_ptr<const Mesh> mesh_next, double dt, const NetworkSpec& net,
                 const Params& params, const SolverConfig& cfg, StepDiagnostics* diag) {
    cfg.validate();
    if (!state.mesh || !mesh_next)
        throw Error("step: missing mesh");
    const int n = int(state.mesh->nodes.size());
    if (int(mesh_next->nodes.size()) != n || mesh_next->triangles.size() != state.mesh->triangles.size())
        throw Error("step: mesh connectivity changed between steps");
    for (const auto& c : state.c)
        if (int(c.size()) != n)
            throw Error("step: concentration vector length does not match the mesh");
    if (!(dt > 0))
        throw Error("step: dt must be positive");

    const bool same_mesh = state.mesh.get() == mesh_next.get();
    const Assembled now = assemble(*state.mesh, cfg.strict_mesh);
    const Assembled next = same_mesh ? now : assemble(*mesh_next, cfg.strict_mesh);
    const auto label_masses = assemble_label_masses(*mesh_next, cfg.strict_mesh);
    const auto D = params.rate.diffusion();
    const std::array<double, 3> decay{params.rate.d_A, params.rate.d_B, params.rate.d_C};

    std::array<Eigen::VectorXd, 3> base;
    std::vector<std::unique_ptr<LinearSolve>> systems;
    for (int i = 0; i < 3; ++i) {
        base[std::size_t(i)] = now.M * state.c[std::size_t(i)] / dt;
        SpMat A = next.M * (1.0 / dt + decay[std::size_t(i)]) + D[std::size_t(i)] * next.K;
        systems.push_back(std::make_unique<LinearSolve>(std::move(A)));
    }

    std::array<Eigen::VectorXd, 3> cur = state.c;
    double residual = 0.0;
    int iters = 0;
    bool converged = false;
    Eigen::VectorXd production(n);
    while (iters < cfg.picard_max_iters) {
        ++iters;
        std::array<Eigen::VectorXd, 3> rhs = base;
        for (const auto& [label, mass] : label_masses) {
            std::array<Eigen::VectorXd, 3> p{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
            for (int j = 0; j < n; ++j) {
                const auto v = effective_production(cur[0][j], cur[1][j], cur[2][j], label, net, params);
                p[0][j] = v[0];
                p[1][j] = v[1];
                p[2][j] = v[2];
            }
            for (int i = 0; i < 3; ++i)
                rhs[std::size_t(i)] += mass * p[std::size_t(i)];
        }
        residual = 0.0;
        for (int i = 0; i < 3; ++i) {
            Eigen::VectorXd c_new = systems[std::size_t(i)]->solve(rhs[std::size_t(i)], cfg.linear_solver_tol);
            if (!c_new.allFinite())
                throw Error("step: non-finite concentrations");
            const double scale = std::max(1.0, c_new.lpNorm<Eigen::Infinity>());
            residual = std::max(residual, (c_new - cur[std::size_t(i)]).lpNorm<Eigen::Infinity>() / scale);
            cur[std::size_t(i)] = std::move(c_new);
        }
        if (residual <= cfg.picard_tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw Error("step: Picard iteration did not converge after " + std::to_string(cfg.picard_max_iters) +
                    " iterations (residual " + std::to_string(residual) + ")");

    if (diag) {
        diag->picard_iters = iters;
        diag->picard_residual = residual;
        diag->min_concentration = std::min({cur[0].minCoeff(), cur[1].minCoeff(), cur[2].minCoeff()});
    }
    SolverState out;
    out.c = std::move(cur);
    out.time = state.time + dt;
    out.mesh = std::move(mesh_next);
    return out;
}

SolverState initial_state(std::shared_ptr<const Mesh> mesh, const NetworkSpec& net) {
    if (!mesh)
        throw Error("initial_state: missing mesh");
    const int n = int(mesh->nodes.size());
    SolverState s;
    for (auto& c : s.c)
        c = Eigen::VectorXd::Zero(n);
    bool found = false;
    for (std::size_t e = 0; e < mesh->triangles.size(); ++e)
        if (mesh->element_labels[e] == net.initial_region_A) {
            found = true;
            for (const int v : mesh->triangles[e])
                s.c[0][v] = net.initial_value_A;
        }
    if (!found)
        throw Error("initial_state: no element carries label " + net.initial_region_A);
    s.mesh = std::move(mesh);
    return s;
}

std::array<Eigen::VectorXd, 3> nodal_production(const SolverState& state, const NetworkSpec& net,
                                                const Params& params) {
    if (!state.mesh)
        throw Error("nodal_production: missing mesh");
    const int n = int(state.mesh->nodes.size());
    const auto labels = node_labels(*state.mesh);
    std::array<Eigen::VectorXd, 3> p{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
    for (int j = 0; j < n; ++j) {
        const auto v =
            effective_production(state.c[0][j], state.c[1][j], state.c[2][j], labels[std::size_t(j)], net, params);
        p[0][j] = v[0];
        p[1][j] = v[1];
        p[2][j] = v[2];
    }
    return p;
}

StageResult run_stage(const StagedGeometry& geometry_t, const StagedGeometry& geometry_t1, const NetworkSpec& net,
                      const Params& params, const SolverConfig& cfg, Mode mode, int n_points_per_segment,
                      double target_edge_length, const StepCallback& on_step) {
    cfg.validate();
    validate_params(params);
    validate_staged_geometry(geometry_t);
    validate_staged_geometry(geometry_t1);
    std::set<std::string> region_labels;
    for (const auto& [label, loops] : geometry_t.subdomains)
        region_labels.insert(label);
    validate_network(net, region_labels);
    if (n_points_per_segment < 2)
        throw Error("run_stage: n_points_per_segment must be at least 2");

    const SegmentedGeometry seg0 = segment_at_intersections(geometry_t);
    const SegmentedGeometry seg1 = segment_at_intersections(geometry_t1);

    StageFields fields;
    if (mode == Mode::Model2) {
        fields.segment_fields = build_segment_fields(seg0, seg1, n_points_per_segment);
        fields.whole_curve = false;
    } else {
        // Whole-curve fields resolved as finely as the per-segment fields of
        // the same curve combined, so the two modes differ in pairing, not in
        // sampling resolution.
        for (const auto& c0 : geometry_t.curves) {
            const auto it = seg0.segments.find(c0.id);
            const int pieces = it == seg0.segments.end() ? 1 : std::max<int>(1, int(it->second.size()));
            DisplacementField f =
                uniform_displacement_field(c0, geometry_t1.curve(c0.id), n_points_per_segment * pieces,
                                           Keying::Parameter);
            fields.curve_fields.emplace(c0.id, std::move(f));
        }
        fields.whole_curve = true;
    }

    const Mesh mesh0 = triangulate(seg0, target_edge_length);

    const int n_steps = std::max(1, int(std::ceil(cfg.t_end / cfg.dt - 1e-9)));
    const double dt = cfg.t_end / n_steps;

    StageResult result;
    const auto record = [&](int k, const SolverState& s, const Mesh& mesh, const StepDiagnostics& d) {
        result.times.push_back(s.time);
        auto areas = labeled_areas(mesh);
        double total = 0;
        for (const auto& [label, a] : areas)
            total += a;
        result.total_areas.push_back(total);
        result.areas.push_back(std::move(areas));
        result.quality.push_back(quality_report(mesh));
        result.diagnostics.push_back(d);
        if (on_step)
            on_step(k, s, result.quality.back(), nodal_production(s, net, params));
    };

    auto mesh_ptr = std::make_shared<const Mesh>(mesh0);
    SolverState state = initial_state(mesh_ptr, net);
    result.min_concentration = 0.0;
    record(0, state, *mesh_ptr, StepDiagnostics{});

    for (int k = 1; k <= n_steps; ++k) {
        const double fraction = double(k) / n_steps;
        double violation = 0.0;
        auto moved = std::make_shared<const Mesh>(move_mesh(mesh0, fields, fraction, &violation));
        result.max_principle_violation = std::max(result.max_principle_violation, violation);
        StepDiagnostics diag;
        state = step(state, moved, dt, net, params, cfg, &diag);
        result.min_concentration = std::min(result.min_concentration, diag.min_concentration);
        record(k, state, *moved, diag);
    }

    result.final_production = nodal_production(state, net, params);
    result.final_state = std::move(state);
    return result;
}

} // namespace growfem
