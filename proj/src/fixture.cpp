#include "growfem/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "growfem/error.hpp"

namespace growfem {

namespace {

constexpr double kB = 0.6;         // minor semi-axis, fixed across stages
constexpr int kDomeIntervals = 160;
constexpr int kArcIntervals = 64;

struct ArcSpec {
    double x;    // chord position on the major axis
    double beta; // distal bulge of the arc apex
};

// Half-ellipse from (0,-b) through (a,0) to (0,b).
Point2 dome_point(double a, double phi) { return {a * std::sin(phi), -kB * std::cos(phi)}; }

// Chord arc from (x,-y) through (x+beta,0) to (x,y), psi in [-1,1].
Point2 arc_point(const ArcSpec& arc, double y, double psi) {
    return {arc.x + arc.beta * (1.0 - psi * psi), y * psi};
}

Curve build_dome(double a, const std::vector<std::pair<double, Point2>>& junctions) {
    const double dphi = std::numbers::pi / kDomeIntervals;
    std::vector<std::pair<double, Point2>> samples;
    for (int k = 0; k <= kDomeIntervals; ++k) {
        const double phi = k == kDomeIntervals ? std::numbers::pi : k * dphi;
        bool near_junction = false;
        for (const auto& [jphi, jp] : junctions)
            if (std::abs(phi - jphi) < 0.2 * dphi)
                near_junction = true;
        if (!near_junction)
            samples.push_back({phi, dome_point(a, phi)});
    }
    for (const auto& j : junctions)
        samples.push_back(j);
    std::sort(samples.begin(), samples.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    Curve c;
    c.id = "dome";
    for (const auto& [phi, p] : samples)
        c.points.push_back(p);
    return c;
}

Curve build_arc(const std::string& id, const ArcSpec& arc, double y, const Point2& lower, const Point2& upper) {
    Curve c;
    c.id = id;
    for (int m = 0; m <= kArcIntervals; ++m) {
        if (m == 0)
            c.points.push_back(lower);
        else if (m == kArcIntervals)
            c.points.push_back(upper);
        else
            c.points.push_back(arc_point(arc, y, -1.0 + 2.0 * m / kArcIntervals));
    }
    return c;
}

// Polyline arc-length parameter of the dome vertex at `target`.
double dome_param(const Curve& dome, const Point2& target) {
    const auto cum = cumulative_lengths(dome);
    for (std::size_t i = 0; i < dome.points.size(); ++i)
        if (dome.points[i] == target)
            return cum[i] / cum.back();
    throw Error("fixture: junction point missing from the dome polyline");
}

StagedGeometry build_stage(int stage_time, double a, const ArcSpec& arc1, const ArcSpec& arc2) {
    const double y1 = kB * std::sqrt(1.0 - (arc1.x / a) * (arc1.x / a));
    const double y2 = kB * std::sqrt(1.0 - (arc2.x / a) * (arc2.x / a));
    const Point2 j1lo{arc1.x, -y1}, j1hi{arc1.x, y1};
    const Point2 j2lo{arc2.x, -y2}, j2hi{arc2.x, y2};
    const double phi1 = std::asin(arc1.x / a);
    const double phi2 = std::asin(arc2.x / a);

    StagedGeometry g;
    g.stage_time = stage_time;
    g.curves.push_back(build_dome(a, {{phi1, j1lo},
                                      {phi2, j2lo},
                                      {std::numbers::pi - phi2, j2hi},
                                      {std::numbers::pi - phi1, j1hi}}));
    g.curves.push_back({"base", {{0.0, kB}, {0.0, -kB}}, false});
    g.curves.push_back(build_arc("arc1", arc1, y1, j1lo, j1hi));
    g.curves.push_back(build_arc("arc2", arc2, y2, j2lo, j2hi));

    const Curve& dome = g.curves.front();
    const double s1lo = dome_param(dome, j1lo), s1hi = dome_param(dome, j1hi);
    const double s2lo = dome_param(dome, j2lo), s2hi = dome_param(dome, j2hi);

    g.subdomains["domain1"] = {{"base", 1, 0.0, 1.0},
                               {"dome", 1, 0.0, s1lo},
                               {"arc1", 1, 0.0, 1.0},
                               {"dome", 1, s1hi, 1.0}};
    g.subdomains["domain2"] = {{"dome", 1, s1lo, s2lo},
                               {"arc2", 1, 0.0, 1.0},
                               {"dome", 1, s2hi, s1hi},
                               {"arc1", -1, 0.0, 1.0}};
    g.subdomains["domain3"] = {{"dome", 1, s2lo, s2hi}, {"arc2", -1, 0.0, 1.0}};
    return g;
}

} // namespace

std::pair<StagedGeometry, StagedGeometry> generate_fixture(double deformation_scale) {
    if (!(deformation_scale > 0) || deformation_scale > 2)
        throw Error("generate_fixture: deformation_scale must lie in (0, 2]");
    const double s = deformation_scale;

    const ArcSpec arc1{0.35, 0.12};
    const ArcSpec arc2{0.70, 0.10};
    const StagedGeometry t0 = build_stage(0, 1.0, arc1, arc2);

    const ArcSpec arc1s{arc1.x + 0.25 * s, std::max(0.03, arc1.beta * (1.0 - 0.25 * s))};
    const ArcSpec arc2s{arc2.x + 0.12 * s, arc2.beta};
    const StagedGeometry t1 = build_stage(1, 1.0 + 0.3 * s, arc1s, arc2s);

    validate_staged_geometry(t0);
    validate_staged_geometry(t1);
    return {t0, t1};
}

} // namespace growfem
