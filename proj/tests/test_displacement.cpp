#include <cmath>
#include <numbers>

#include "doctest.h"
#include "growfem/displacement.hpp"
#include "growfem/error.hpp"

using namespace growfem;

namespace {

Curve circle_arc(double radius, int n_dense, const std::string& id) {
    Curve c;
    c.id = id;
    for (int i = 0; i < n_dense; ++i) {
        const double th = 0.5 * std::numbers::pi * i / (n_dense - 1);
        c.points.push_back({radius * std::cos(th), radius * std::sin(th)});
    }
    return c;
}

} // namespace

TEST_CASE("translated square gives a constant field") {
    Curve sq{"sq", {{0, 0}, {1, 0}, {1, 1}, {0, 1}}, true};
    Curve moved{"sq", {{2, 3}, {3, 3}, {3, 4}, {2, 4}}, true};
    const DisplacementField f = uniform_displacement_field(sq, moved, 12, Keying::Parameter);
    REQUIRE(f.rows.size() == 12);
    for (const auto& r : f.rows) {
        CHECK(r.dx == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(r.dy == doctest::Approx(3.0).epsilon(1e-12));
    }
    const Point2 d = evaluate_displacement(f, 0.37);
    CHECK(d.x == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(d.y == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("identical curves give the zero field") {
    const Curve c = circle_arc(1.0, 200, "arc");
    const DisplacementField f = uniform_displacement_field(c, c, 9, Keying::Parameter);
    for (const auto& r : f.rows) {
        CHECK(r.dx == 0.0);
        CHECK(r.dy == 0.0);
    }
}

TEST_CASE("uniform stretch about the origin") {
    Curve a{"a", {{0, 0}, {1, 0}}, false};
    Curve b{"a", {{0, 0}, {2, 0}}, false};
    SUBCASE("parameter keyed") {
        const DisplacementField f = uniform_displacement_field(a, b, 3, Keying::Parameter);
        REQUIRE(f.rows.size() == 3);
        CHECK(f.rows[0].key1 == 0.0);
        CHECK(f.rows[1].key1 == doctest::Approx(0.5));
        CHECK(f.rows[2].key1 == 1.0);
        CHECK(f.rows[0].dx == doctest::Approx(0.0));
        CHECK(f.rows[1].dx == doctest::Approx(0.5));
        CHECK(f.rows[2].dx == doctest::Approx(1.0));
        for (const auto& r : f.rows)
            CHECK(r.dy == 0.0);
    }
    SUBCASE("coordinate keyed") {
        const DisplacementField f = uniform_displacement_field(a, b, 3, Keying::Coordinate);
        CHECK(f.rows[1].key1 == doctest::Approx(0.5));
        CHECK(f.rows[1].key2 == 0.0);
        const Point2 d = evaluate_displacement(f, Point2{0.25, 0.0}, 1e-9);
        CHECK(d.x == doctest::Approx(0.25).epsilon(1e-12));
    }
}

TEST_CASE("open/closed mismatch is rejected") {
    Curve a{"a", {{0, 0}, {1, 0}, {1, 1}}, false};
    Curve b{"a", {{0, 0}, {1, 0}, {1, 1}}, true};
    CHECK_THROWS_AS(uniform_displacement_field(a, b, 8, Keying::Parameter), Error);
}

TEST_CASE("boundary_parameter walks arc length") {
    CurveSegment seg;
    seg.parent_id = "p";
    seg.segment_index = 0;
    seg.points = {{0, 0}, {2, 0}};
    CHECK(boundary_parameter(seg, {0, 0}) == 0.0);
    CHECK(boundary_parameter(seg, {2, 0}) == 1.0);
    CHECK(boundary_parameter(seg, {1, 0}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(boundary_parameter(seg, {1, 0.5}), Error);

    CurveSegment ell;
    ell.parent_id = "L";
    ell.segment_index = 0;
    ell.points = {{0, 0}, {1, 0}, {1, 1}};
    CHECK(boundary_parameter(ell, {1, 0}) == doctest::Approx(0.5));
}

TEST_CASE("evaluate_displacement interpolates and honors exact keys") {
    DisplacementField f;
    f.parent_id = "p";
    f.keying = Keying::Parameter;
    f.rows = {{0.0, 0, 0.0, 0.0}, {1.0, 0, 2.0, 4.0}};
    const Point2 mid = evaluate_displacement(f, 0.5);
    CHECK(mid.x == doctest::Approx(1.0));
    CHECK(mid.y == doctest::Approx(2.0));
    const Point2 at0 = evaluate_displacement(f, 0.0);
    CHECK(at0.x == 0.0);
    const Point2 at1 = evaluate_displacement(f, 1.0);
    CHECK(at1.x == 2.0);
    CHECK(at1.y == 4.0);
    CHECK_THROWS_AS(evaluate_displacement(f, -0.1), Error);
    CHECK_THROWS_AS(evaluate_displacement(f, 1.1), Error);
    CHECK_THROWS_AS(evaluate_displacement(f, Point2{0, 0}, 1.0), Error); // wrong keying
}

TEST_CASE("endpoint exactness of segment fields") {
    const Curve a = circle_arc(1.0, 400, "arc");
    const Curve b = circle_arc(1.3, 400, "arc");
    const DisplacementField f = uniform_displacement_field(a, b, 25, Keying::Parameter);
    // Row values at the ends are the exact coordinate differences.
    CHECK(f.rows.front().dx == b.points.front().x - a.points.front().x);
    CHECK(f.rows.front().dy == b.points.front().y - a.points.front().y);
    CHECK(f.rows.back().dx == b.points.back().x - a.points.back().x);
    CHECK(f.rows.back().dy == b.points.back().y - a.points.back().y);
    const Point2 d0 = evaluate_displacement(f, 0.0);
    const Point2 d1 = evaluate_displacement(f, 1.0);
    CHECK(std::abs(a.points.front().x + d0.x - b.points.front().x) < 1e-15);
    CHECK(std::abs(a.points.front().y + d0.y - b.points.front().y) < 1e-15);
    CHECK(std::abs(a.points.back().x + d1.x - b.points.back().x) < 1e-15);
    CHECK(std::abs(a.points.back().y + d1.y - b.points.back().y) < 1e-15);
}

TEST_CASE("composition reproduces the later stage at the sample points") {
    const Curve a = circle_arc(1.0, 800, "arc");
    Curve b = circle_arc(1.25, 800, "arc");
    for (auto& p : b.points)
        p.y += 0.4; // scale plus shift
    const int n = 41;
    const DisplacementField f = uniform_displacement_field(a, b, n, Keying::Parameter);
    const Curve ra = resample_uniform(a, n);
    const Curve rb = resample_uniform(b, n);
    for (int i = 0; i < n; ++i) {
        const Point2 d = evaluate_displacement(f, double(i) / (n - 1));
        CHECK(std::abs(ra.points[std::size_t(i)].x + d.x - rb.points[std::size_t(i)].x) < 1e-12);
        CHECK(std::abs(ra.points[std::size_t(i)].y + d.y - rb.points[std::size_t(i)].y) < 1e-12);
    }
}

TEST_CASE("keying equivalence on a circle arc") {
    // Both keyings interpolate the same rows; each converges at O(1/n^2)
    // toward the true map (radial scaling), and they agree to within that
    // interpolation error.
    const Curve a = circle_arc(1.0, 2048, "arc");
    const Curve b = circle_arc(1.3, 2048, "arc");
    double err_param[2] = {0, 0}, err_coord[2] = {0, 0}, err_cross[2] = {0, 0};
    const int ns[2] = {16, 64};
    for (int k = 0; k < 2; ++k) {
        const DisplacementField fp = uniform_displacement_field(a, b, ns[k], Keying::Parameter);
        const DisplacementField fc = uniform_displacement_field(a, b, ns[k], Keying::Coordinate);
        for (int j = 1; j < 200; ++j) {
            const double u = j / 200.0;
            const double th = 0.5 * std::numbers::pi * u;
            const Point2 p{std::cos(th), std::sin(th)};
            const Point2 truth{0.3 * p.x, 0.3 * p.y};
            const Point2 dp = evaluate_displacement(fp, u);
            const Point2 dc = evaluate_displacement(fc, p, 0.05);
            err_param[k] = std::max(err_param[k], dist(dp, truth));
            err_coord[k] = std::max(err_coord[k], dist(dc, truth));
            err_cross[k] = std::max(err_cross[k], dist(dp, dc));
        }
        CHECK(err_cross[k] <= 2 * std::max(err_param[k], err_coord[k]));
    }
    const double ratio_p = err_param[0] / err_param[1];
    const double ratio_c = err_coord[0] / err_coord[1];
    CHECK(ratio_p > 8.0);
    CHECK(ratio_p < 24.0);
    CHECK(ratio_c > 8.0);
    CHECK(ratio_c < 24.0);
}

TEST_CASE("build_segment_fields matches segments across stages") {
    auto make_stage = [](double stretch) {
        StagedGeometry g;
        g.curves.push_back({"horiz", {{-2 * stretch, 0}, {2 * stretch, 0}}, false});
        g.curves.push_back({"vert", {{-stretch, -1}, {-stretch, 1}}, false});
        return g;
    };
    const SegmentedGeometry s0 = segment_at_intersections(make_stage(1.0));
    const SegmentedGeometry s1 = segment_at_intersections(make_stage(1.2));
    const auto fields = build_segment_fields(s0, s1, 20);
    CHECK(fields.size() == 4); // horiz splits in two, vert splits in two
    for (const auto& [key, f] : fields) {
        CHECK(f.rows.size() == 20);
        CHECK(f.segment_index >= 0);
    }
    const auto whole = build_whole_curve_fields(make_stage(1.0), make_stage(1.2), 20);
    CHECK(whole.size() == 2);
    CHECK(whole.at("horiz").segment_index == -1);
}

TEST_CASE("stage topology changes are rejected") {
    StagedGeometry g0, g1;
    g0.curves.push_back({"a", {{0, 0}, {1, 0}}, false});
    g0.curves.push_back({"b", {{0.5, -1}, {0.5, 1}}, false});
    g1.curves.push_back({"a", {{0, 0}, {1, 0}}, false});
    g1.curves.push_back({"b", {{2, -1}, {2, 1}}, false}); // no longer crosses
    const SegmentedGeometry s0 = segment_at_intersections(g0);
    const SegmentedGeometry s1 = segment_at_intersections(g1);
    CHECK_THROWS_AS(build_segment_fields(s0, s1, 10), Error);
}

TEST_CASE("closed-field evaluation wraps") {
    Curve sq{"sq", {{0, 0}, {4, 0}, {4, 4}, {0, 4}}, true};
    Curve moved{"sq", {{1, 0}, {5, 0}, {5, 4}, {1, 4}}, true};
    const DisplacementField f = uniform_displacement_field(sq, moved, 16, Keying::Parameter);
    const Point2 d = evaluate_displacement(f, 0.999);
    CHECK(d.x == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(d.y == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("coordinate evaluation rejects distant queries") {
    Curve a{"a", {{0, 0}, {1, 0}}, false};
    Curve b{"a", {{0, 0}, {1, 0.5}}, false};
    const DisplacementField f = uniform_displacement_field(a, b, 5, Keying::Coordinate);
    CHECK_THROWS_AS(evaluate_displacement(f, Point2{0.5, 0.3}, 0.01), Error);
    CHECK_THROWS_AS(evaluate_displacement(f, 0.5), Error); // wrong keying
}
