#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "growfem/error.hpp"
#include "growfem/fixture.hpp"
#include "growfem/geometry.hpp"
#include "growfem/mesh.hpp"
#include "growfem/solver.hpp"

using namespace growfem;

namespace {

Mesh reference_triangle_mesh() {
    Mesh m;
    m.nodes = {{0, 0}, {1, 0}, {0, 1}};
    m.creation_nodes = m.nodes;
    m.triangles = {{0, 1, 2}};
    m.element_labels = {"domain1"};
    return m;
}

Mesh unit_square_mesh(double target) {
    StagedGeometry g;
    g.curves.push_back({"sq", {{0, 0}, {1, 0}, {1, 1}, {0, 1}}, true});
    g.subdomains["domain1"] = {{"sq", 1, 0.0, 1.0}};
    return triangulate(segment_at_intersections(g), target);
}

Params no_reaction() {
    Params p;
    p.rate.rho_A = p.rate.rho_B = p.rate.rho_C = 0.0;
    p.rate.d_A = p.rate.d_B = p.rate.d_C = 0.0;
    return p;
}

double total_mass(const Mesh& mesh, const Eigen::VectorXd& c) {
    const Assembled a = assemble(mesh, false);
    return (a.M * c).sum();
}

} // namespace

TEST_CASE("reference triangle mass matrix") {
    const Mesh m = reference_triangle_mesh();
    const Assembled a = assemble(m);
    const double unit = 0.5 / 12.0;
    for (int r = 0; r < 3; ++r)
        for (int s = 0; s < 3; ++s)
            CHECK(a.M.coeff(r, s) == doctest::Approx(unit * (r == s ? 2.0 : 1.0)).epsilon(1e-15));
    CHECK(a.M.sum() == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("stiffness annihilates constants and mass sums to the area") {
    const Mesh mesh = unit_square_mesh(0.13);
    const Assembled a = assemble(mesh);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(long(mesh.nodes.size()));
    CHECK((a.K * ones).lpNorm<Eigen::Infinity>() <= 1e-12);
    const Eigen::SparseMatrix<double> Kt = a.K.transpose();
    CHECK((a.K - Kt).norm() <= 1e-14);
    const Eigen::SparseMatrix<double> Mt = a.M.transpose();
    CHECK((a.M - Mt).norm() <= 1e-16);
    CHECK(a.M.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("strict assembly names inverted elements") {
    Mesh m = reference_triangle_mesh();
    m.nodes[2] = {1.0, -1.0};
    CHECK_THROWS_WITH_AS(assemble(m), doctest::Contains("element 0"), Error);
    CHECK_NOTHROW(assemble(m, false));
}

TEST_CASE("static mesh conserves total mass") {
    const Mesh mesh = unit_square_mesh(0.11);
    auto mesh_ptr = std::make_shared<const Mesh>(mesh);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uni(0.0, 2.0);
    SolverState s;
    s.mesh = mesh_ptr;
    for (auto& c : s.c) {
        c.resize(long(mesh.nodes.size()));
        for (long i = 0; i < c.size(); ++i)
            c[i] = uni(rng);
    }
    Params p = no_reaction();
    p.rate.D_diff = 5.0;
    SolverConfig cfg;
    cfg.dt = 0.01;

    const double before[3] = {total_mass(mesh, s.c[0]), total_mass(mesh, s.c[1]), total_mass(mesh, s.c[2])};
    for (int k = 0; k < 5; ++k)
        s = step(s, mesh_ptr, cfg.dt, NetworkSpec{}, p, cfg);
    for (int i = 0; i < 3; ++i)
        CHECK(total_mass(mesh, s.c[std::size_t(i)]) == doctest::Approx(before[i]).epsilon(1e-12));
}

TEST_CASE("uniform degradation matches the closed form") {
    const Mesh mesh = unit_square_mesh(0.3);
    auto mesh_ptr = std::make_shared<const Mesh>(mesh);
    SolverState s;
    s.mesh = mesh_ptr;
    for (auto& c : s.c)
        c = Eigen::VectorXd::Ones(long(mesh.nodes.size()));
    Params p = no_reaction();
    p.rate.d_A = 0.5;
    p.rate.d_B = 1.5;
    p.rate.d_C = 0.0;
    p.rate.D_diff = 2.0;
    SolverConfig cfg;
    const double dt = 0.02;

    const SolverState next = step(s, mesh_ptr, dt, NetworkSpec{}, p, cfg);
    for (long i = 0; i < next.c[0].size(); ++i) {
        CHECK(next.c[0][i] == doctest::Approx(1.0 / (1.0 + 0.5 * dt)).epsilon(1e-12));
        CHECK(next.c[1][i] == doctest::Approx(1.0 / (1.0 + 1.5 * dt)).epsilon(1e-12));
        CHECK(next.c[2][i] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("temporal order of accuracy on pure decay") {
    const Mesh mesh = reference_triangle_mesh();
    auto mesh_ptr = std::make_shared<const Mesh>(mesh);
    Params p = no_reaction();
    p.rate.d_A = p.rate.d_B = p.rate.d_C = 1.0;
    SolverConfig cfg;

    const auto value_at_1 = [&](double dt) {
        SolverState s;
        s.mesh = mesh_ptr;
        for (auto& c : s.c)
            c = Eigen::VectorXd::Ones(3);
        const int n = int(std::lround(1.0 / dt));
        for (int k = 0; k < n; ++k)
            s = step(s, mesh_ptr, dt, NetworkSpec{}, p, cfg);
        return s.c[0][0];
    };
    const double exact = std::exp(-1.0);
    const double e1 = std::abs(value_at_1(0.2) - exact);
    const double e2 = std::abs(value_at_1(0.1) - exact);
    const double e3 = std::abs(value_at_1(0.05) - exact);
    const double p1 = std::log2(e1 / e2);
    const double p2 = std::log2(e2 / e3);
    CHECK(p1 > 0.9);
    CHECK(p1 < 1.1);
    CHECK(p2 > 0.9);
    CHECK(p2 < 1.1);
}

TEST_CASE("uniform dilation dilutes pointwise and conserves mass") {
    const Mesh mesh = unit_square_mesh(0.14);
    auto mesh_ptr = std::make_shared<const Mesh>(mesh);
    const double alpha = 1.3;
    Mesh grown = mesh;
    for (auto& p : grown.nodes)
        p = p * std::sqrt(alpha);
    auto grown_ptr = std::make_shared<const Mesh>(grown);

    SolverState s;
    s.mesh = mesh_ptr;
    s.c[0] = Eigen::VectorXd::Constant(long(mesh.nodes.size()), 2.5);
    s.c[1] = Eigen::VectorXd::Zero(long(mesh.nodes.size()));
    s.c[2] = Eigen::VectorXd::Zero(long(mesh.nodes.size()));
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
        s.c[1][long(i)] = 1.0 + mesh.nodes[i].x; // non-uniform field dilutes identically

    Params p = no_reaction();
    p.rate.D_diff = 0.0;
    SolverConfig cfg;

    const double m0[2] = {total_mass(mesh, s.c[0]), total_mass(mesh, s.c[1])};
    const SolverState next = step(s, grown_ptr, 0.05, NetworkSpec{}, p, cfg);
    for (long i = 0; i < next.c[0].size(); ++i) {
        CHECK(next.c[0][i] == doctest::Approx(2.5 / alpha).epsilon(1e-10));
        CHECK(next.c[1][i] == doctest::Approx(s.c[1][i] / alpha).epsilon(1e-10));
    }
    CHECK(total_mass(grown, next.c[0]) == doctest::Approx(m0[0]).epsilon(1e-10));
    CHECK(total_mass(grown, next.c[1]) == doctest::Approx(m0[1]).epsilon(1e-10));
}

TEST_CASE("moving fixture mesh conserves mass without reactions") {
    const auto [g0, g1] = generate_fixture(1.0);
    const auto seg0 = segment_at_intersections(g0);
    const auto seg1 = segment_at_intersections(g1);
    const Mesh mesh0 = triangulate(seg0, 0.12);
    StageFields fields;
    fields.segment_fields = build_segment_fields(seg0, seg1, 100);

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> uni(0.5, 1.5);
    SolverState s;
    s.mesh = std::make_shared<const Mesh>(mesh0);
    for (auto& c : s.c) {
        c.resize(long(mesh0.nodes.size()));
        for (long i = 0; i < c.size(); ++i)
            c[i] = uni(rng);
    }
    Params p = no_reaction();
    p.rate.D_diff = 3600.0;
    SolverConfig cfg;

    const double before = total_mass(mesh0, s.c[0]);
    const int n = 10;
    for (int k = 1; k <= n; ++k) {
        auto moved = std::make_shared<const Mesh>(move_mesh(mesh0, fields, double(k) / n));
        s = step(s, moved, 0.1, NetworkSpec{}, p, cfg);
    }
    CHECK(total_mass(*s.mesh, s.c[0]) == doctest::Approx(before).epsilon(1e-10));
}

TEST_CASE("zero-flux eigenmode decays at the analytic rate") {
    const Mesh mesh = unit_square_mesh(0.025);
    auto mesh_ptr = std::make_shared<const Mesh>(mesh);
    const long n = long(mesh.nodes.size());
    Eigen::VectorXd w(n);
    for (long i = 0; i < n; ++i)
        w[i] = std::cos(std::numbers::pi * mesh.nodes[std::size_t(i)].x);

    SolverState s;
    s.mesh = mesh_ptr;
    s.c[0] = Eigen::VectorXd::Ones(n) + 0.5 * w;
    s.c[1] = Eigen::VectorXd::Zero(n);
    s.c[2] = Eigen::VectorXd::Zero(n);

    Params p = no_reaction();
    p.rate.D_diff = 1.0;
    SolverConfig cfg;
    const double dt = 5e-4;
    const int steps = 100;

    const Assembled a = assemble(mesh);
    const double denom = w.dot(a.M * w);
    std::vector<double> t, ln_amp;
    for (int k = 0; k <= steps; ++k) {
        const double amp = w.dot(a.M * s.c[0]) / denom;
        REQUIRE(amp > 0);
        t.push_back(k * dt);
        ln_amp.push_back(std::log(amp));
        if (k < steps)
            s = step(s, mesh_ptr, dt, NetworkSpec{}, p, cfg);
    }
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        st += t[i];
        sy += ln_amp[i];
        stt += t[i] * t[i];
        sty += t[i] * ln_amp[i];
    }
    const double m = double(t.size());
    const double slope = (m * sty - st * sy) / (m * stt - st * st);
    const double rate = -slope;
    CHECK(rate == doctest::Approx(std::numbers::pi * std::numbers::pi).epsilon(0.02));
}

TEST_CASE("diffusion respects the discrete maximum principle") {
    const Mesh mesh = unit_square_mesh(0.05);
    auto mesh_ptr = std::make_shared<const Mesh>(mesh);
    const long n = long(mesh.nodes.size());
    SolverState s;
    s.mesh = mesh_ptr;
    s.c[0].resize(n);
    for (long i = 0; i < n; ++i)
        s.c[0][i] = 1.0 + 0.5 * std::cos(std::numbers::pi * mesh.nodes[std::size_t(i)].x);
    s.c[1] = Eigen::VectorXd::Zero(n);
    s.c[2] = Eigen::VectorXd::Zero(n);
    const double lo = s.c[0].minCoeff(), hi = s.c[0].maxCoeff();

    Params p = no_reaction();
    p.rate.D_diff = 1.0;
    SolverConfig cfg;
    for (int k = 0; k < 20; ++k) {
        s = step(s, mesh_ptr, 0.01, NetworkSpec{}, p, cfg);
        CHECK(s.c[0].minCoeff() >= lo - 1e-10);
        CHECK(s.c[0].maxCoeff() <= hi + 1e-10);
    }
}

TEST_CASE("initial state fills the seeded region") {
    const auto [g0, g1] = generate_fixture(1.0);
    const Mesh mesh = triangulate(segment_at_intersections(g0), 0.12);
    auto mesh_ptr = std::make_shared<const Mesh>(mesh);
    const SolverState s = initial_state(mesh_ptr, NetworkSpec{});

    std::vector<char> touches(mesh.nodes.size(), 0);
    for (std::size_t e = 0; e < mesh.triangles.size(); ++e)
        if (mesh.element_labels[e] == "domain3")
            for (const int v : mesh.triangles[e])
                touches[std::size_t(v)] = 1;
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
        CHECK(s.c[0][long(i)] == (touches[i] ? 1.0 : 0.0));
    CHECK(s.c[1].isZero(0.0));
    CHECK(s.c[2].isZero(0.0));

    NetworkSpec bad;
    bad.initial_region_A = "domain9";
    CHECK_THROWS_AS(initial_state(mesh_ptr, bad), Error);
}

TEST_CASE("production stays inside its regions through a run") {
    const auto [g0, g1] = generate_fixture(1.0);
    SolverConfig cfg;
    cfg.dt = 0.1;
    const StageResult r =
        run_stage(g0, g1, NetworkSpec{}, Params{}, cfg, Mode::Model2, 60, 0.14);

    const Mesh& mesh = *r.final_state.mesh;
    std::map<int, std::map<std::string, int>> counts;
    for (std::size_t e = 0; e < mesh.triangles.size(); ++e)
        for (const int v : mesh.triangles[e])
            ++counts[v][mesh.element_labels[e]];
    for (const auto& [v, by_label] : counts) {
        std::string majority;
        int best = -1;
        for (const auto& [label, count] : by_label)
            if (count > best) {
                best = count;
                majority = label;
            }
        if (majority != "domain1")
            CHECK(r.final_production[0][v] == 0.0);
        if (majority != "domain3")
            CHECK(r.final_production[2][v] == 0.0);
    }
}

TEST_CASE("model2 stage run holds quality and hits junctions") {
    const auto [g0, g1] = generate_fixture(1.0);
    SolverConfig cfg;
    cfg.dt = 0.05;
    const StageResult r = run_stage(g0, g1, NetworkSpec{}, Params{}, cfg, Mode::Model2, 60, 0.14);

    CHECK(r.times.size() == 21);
    CHECK(r.areas.size() == r.times.size());
    CHECK(r.quality.size() == r.times.size());
    CHECK(r.diagnostics.size() == r.times.size());
    for (const auto& q : r.quality)
        CHECK(q.inverted_count == 0);
    CHECK(r.min_concentration >= -1e-8);
    CHECK(r.max_principle_violation <= 1e-9);

    const auto seg1 = segment_at_intersections(g1);
    const Mesh& final_mesh = *r.final_state.mesh;
    for (std::size_t k = 0; k < seg1.junctions.size(); ++k)
        CHECK(dist(final_mesh.nodes[std::size_t(final_mesh.junction_nodes[k])], seg1.junctions[k].point) <= 1e-9);

    // Stage-end subdomain areas approximate the stage-(t+1) loop areas.
    const auto& last = r.areas.back();
    for (const auto& [label, area] : last)
        CHECK(area == doctest::Approx(polygon_area(subdomain_loop_polygon(g1, label))).epsilon(0.01));
}

TEST_CASE("picard reports non-convergence") {
    const auto [g0, g1] = generate_fixture(1.0);
    const Mesh mesh = triangulate(segment_at_intersections(g0), 0.2);
    auto mesh_ptr = std::make_shared<const Mesh>(mesh);
    SolverState s = initial_state(mesh_ptr, NetworkSpec{});
    SolverConfig cfg;
    cfg.picard_max_iters = 1;
    cfg.picard_tol = 1e-14;
    CHECK_THROWS_WITH_AS(step(s, mesh_ptr, 0.01, NetworkSpec{}, Params{}, cfg), doctest::Contains("Picard"), Error);
}
