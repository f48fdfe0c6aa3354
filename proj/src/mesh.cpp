#include "growfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "growfem/error.hpp"
#include "growfem/triangulation.hpp"

namespace growfem {

std::vector<Point2> Mesh::node_displacement() const {
    std::vector<Point2> d(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        d[i] = nodes[i] - creation_nodes[i];
    return d;
}

namespace {

struct PointKey {
    double x, y;
    bool operator<(const PointKey& o) const { return x < o.x || (x == o.x && y < o.y); }
};

// Parent-curve parameter of each polyline vertex of a segment. Endpoint
// parameters are taken verbatim; interior vertices by arc length.
std::vector<double> segment_vertex_params(const CurveSegment& seg) {
    const Curve view = segment_as_curve(seg);
    const auto cum = cumulative_lengths(view);
    const double total = cum.back();
    std::vector<double> s(seg.points.size());
    const double span = seg.parent_s1 - seg.parent_s0;
    for (std::size_t i = 0; i < seg.points.size(); ++i)
        s[i] = seg.parent_s0 + span * (cum[i] / total);
    s.front() = seg.parent_s0;
    s.back() = seg.parent_s1;
    return s;
}

} // namespace

Mesh triangulate(const SegmentedGeometry& geometry, double target_edge_length) {
    if (geometry.segments.empty())
        throw Error("triangulate: geometry has no segments");
    validate_staged_geometry(geometry.source);

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& c : geometry.source.curves)
        for (const auto& p : c.points) {
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
    const double diag = std::hypot(xmax - xmin, ymax - ymin);
    const double h = target_edge_length > 0 ? target_edge_length : diag / 30.0;
    if (!(h > 0))
        throw Error("triangulate: empty geometry");

    std::vector<const CurveSegment*> flat;
    for (const auto& [parent, segs] : geometry.segments)
        for (const auto& s : segs)
            flat.push_back(&s);
    if (flat.empty())
        throw Error("triangulate: geometry has no segments");

    TriangulationInput input;
    std::map<PointKey, int> index_of;
    const auto intern = [&](const Point2& p) {
        const auto [it, inserted] = index_of.try_emplace({p.x, p.y}, int(input.points.size()));
        if (inserted)
            input.points.push_back(p);
        return it->second;
    };

    for (std::size_t m = 0; m < flat.size(); ++m) {
        const CurveSegment& seg = *flat[m];
        const auto params = segment_vertex_params(seg);
        for (std::size_t i = 0; i + 1 < seg.points.size(); ++i) {
            const Point2& a = seg.points[i];
            const Point2& b = seg.points[i + 1];
            const int n_sub = std::max(1, int(std::ceil(dist(a, b) / h)));
            int prev = intern(a);
            double sprev = params[i];
            for (int k = 1; k <= n_sub; ++k) {
                const double t = double(k) / n_sub;
                const int cur = k == n_sub ? intern(b) : intern(lerp(a, b, t));
                const double scur = k == n_sub ? params[i + 1] : params[i] + t * (params[i + 1] - params[i]);
                input.constraints.push_back({prev, cur, int(m), sprev, scur});
                prev = cur;
                sprev = scur;
            }
        }
    }

    const auto outer = outer_boundary_polygon(geometry.source);
    const double max_area = std::sqrt(3.0) / 4.0 * h * h;
    const TriangulationResult result = conforming_delaunay(input, max_area, 22.0, outer);

    Mesh mesh;
    mesh.nodes = result.points;
    mesh.creation_nodes = result.points;
    mesh.triangles = result.triangles;

    std::map<std::string, std::vector<Point2>> loop_polygons;
    for (const auto& [label, loops] : geometry.source.subdomains)
        loop_polygons[label] = subdomain_loop_polygon(geometry.source, label);
    mesh.element_labels.reserve(mesh.triangles.size());
    for (const auto& t : mesh.triangles) {
        const Point2& a = mesh.nodes[std::size_t(t[0])];
        const Point2& b = mesh.nodes[std::size_t(t[1])];
        const Point2& c = mesh.nodes[std::size_t(t[2])];
        const Point2 centroid{(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
        std::string found;
        for (const auto& [label, poly] : loop_polygons)
            if (point_in_polygon(centroid, poly)) {
                found = label;
                break;
            }
        if (found.empty())
            throw Error("triangulate: element centroid lies in no subdomain");
        mesh.element_labels.push_back(found);
    }

    mesh.boundary_tags.reserve(result.constraints.size());
    for (const auto& c : result.constraints) {
        const CurveSegment& seg = *flat[std::size_t(c.marker)];
        mesh.boundary_tags.push_back({c.a, c.b, seg.parent_id, seg.segment_index, c.s0, c.s1});
    }

    for (const auto& j : geometry.junctions) {
        const auto it = index_of.find({j.point.x, j.point.y});
        if (it == index_of.end())
            throw Error("triangulate: junction point missing from the point set");
        mesh.junction_nodes.push_back(it->second);
    }

    const auto areas = labeled_areas(mesh);
    double total = 0;
    for (const auto& [label, a] : areas) {
        total += a;
        const double want = std::abs(polygon_area(loop_polygons.at(label)));
        if (std::abs(a - want) > 0.01 * want)
            throw Error("triangulate: labeled area of " + label + " off by more than 1%");
    }
    const double outer_area = std::abs(polygon_area(outer));
    if (std::abs(total - outer_area) > 1e-6 * outer_area)
        throw Error("triangulate: element areas do not sum to the domain area");

    return mesh;
}

double element_quality(const Mesh& mesh, int element) {
    if (element < 0 || element >= int(mesh.triangles.size()))
        throw Error("element_quality: element index out of range");
    const auto& t = mesh.triangles[std::size_t(element)];
    const Point2& a = mesh.nodes[std::size_t(t[0])];
    const Point2& b = mesh.nodes[std::size_t(t[1])];
    const Point2& c = mesh.nodes[std::size_t(t[2])];
    const double signed_area = 0.5 * cross(b - a, c - a);
    const double l2 = dot(b - a, b - a) + dot(c - b, c - b) + dot(a - c, a - c);
    if (l2 == 0)
        return 0.0;
    return 4.0 * std::sqrt(3.0) * signed_area / l2;
}

QualityReport quality_report(const Mesh& mesh) {
    QualityReport r;
    r.per_element_quality.reserve(mesh.triangles.size());
    for (int e = 0; e < int(mesh.triangles.size()); ++e) {
        const double q = element_quality(mesh, e);
        r.per_element_quality.push_back(q);
        r.min_quality = std::min(r.min_quality, q);
        if (q < 0)
            ++r.inverted_count;
    }
    return r;
}

std::vector<int> constrained_node_set(const Mesh& mesh) {
    std::set<int> s;
    for (const auto& tag : mesh.boundary_tags) {
        s.insert(tag.n0);
        s.insert(tag.n1);
    }
    return {s.begin(), s.end()};
}

namespace {

struct Attachment {
    std::string parent_id;
    int segment_index;
    double s;
};

// Stage-end displacement of one constrained node from its field.
Point2 boundary_displacement(const StageFields& fields, const Attachment& at, const Point2& creation_pos,
                             const std::map<std::pair<std::string, int>, std::pair<double, double>>& seg_spans) {
    const DisplacementField* field = nullptr;
    double s = at.s;
    if (fields.whole_curve) {
        const auto it = fields.curve_fields.find(at.parent_id);
        if (it == fields.curve_fields.end())
            throw Error("move_mesh: no displacement field for curve " + at.parent_id);
        field = &it->second;
        if (field->closed)
            s -= std::floor(s);
    } else {
        const auto it = fields.segment_fields.find({at.parent_id, at.segment_index});
        if (it == fields.segment_fields.end())
            throw Error("move_mesh: no displacement field for segment " + at.parent_id + "#" +
                        std::to_string(at.segment_index));
        field = &it->second;
        const auto [s0, s1] = seg_spans.at({at.parent_id, at.segment_index});
        s = (s - s0) / (s1 - s0);
    }
    if (s < -1e-9 || s > 1.0 + 1e-9)
        throw Error("move_mesh: boundary parameter " + std::to_string(s) + " outside [0,1]");
    s = std::clamp(s, 0.0, 1.0);
    if (field->keying == Keying::Parameter)
        return evaluate_displacement(*field, s);
    double spacing = 0;
    for (std::size_t i = 0; i + 1 < field->rows.size(); ++i)
        spacing = std::max(spacing, std::hypot(field->rows[i + 1].key1 - field->rows[i].key1,
                                               field->rows[i + 1].key2 - field->rows[i].key2));
    return evaluate_displacement(*field, creation_pos, 0.75 * spacing + 1e-12);
}

} // namespace

Mesh move_mesh(const Mesh& mesh, const StageFields& fields, double fraction, double* max_principle_violation) {
    if (fraction < -1e-12 || fraction > 1.0 + 1e-12)
        throw Error("move_mesh: fraction must lie in [0,1]");
    fraction = std::clamp(fraction, 0.0, 1.0);

    // Per-node attachments and per-parent incident-edge counts. A junction
    // node carries several attachments; with whole-curve fields the parent
    // with the most incident boundary edges claims it (ties to the smaller
    // id), with per-segment fields all incident fields agree at the shared
    // endpoint so the first serves.
    std::map<int, std::vector<Attachment>> attachments;
    std::map<int, std::map<std::string, int>> edge_counts;
    std::map<std::pair<std::string, int>, std::pair<double, double>> seg_spans;
    for (const auto& tag : mesh.boundary_tags) {
        attachments[tag.n0].push_back({tag.parent_id, tag.segment_index, tag.s0});
        attachments[tag.n1].push_back({tag.parent_id, tag.segment_index, tag.s1});
        ++edge_counts[tag.n0][tag.parent_id];
        ++edge_counts[tag.n1][tag.parent_id];
        const auto key = std::make_pair(tag.parent_id, tag.segment_index);
        const auto it = seg_spans.find(key);
        if (it == seg_spans.end())
            seg_spans[key] = {std::min(tag.s0, tag.s1), std::max(tag.s0, tag.s1)};
        else {
            it->second.first = std::min({it->second.first, tag.s0, tag.s1});
            it->second.second = std::max({it->second.second, tag.s0, tag.s1});
        }
    }
    if (attachments.empty())
        throw Error("move_mesh: mesh has no boundary tags");

    const int n = int(mesh.creation_nodes.size());
    std::vector<Point2> delta(std::size_t(n), Point2{0, 0});
    std::vector<char> constrained(std::size_t(n), 0);
    for (const auto& [node, ats] : attachments) {
        const Attachment* pick = &ats.front();
        if (fields.whole_curve && ats.size() > 1) {
            const auto& counts = edge_counts.at(node);
            std::string best;
            int best_count = -1;
            for (const auto& [parent, count] : counts)
                if (count > best_count || (count == best_count && parent < best))
                    best = parent, best_count = count;
            for (const auto& at : ats)
                if (at.parent_id == best) {
                    pick = &at;
                    break;
                }
        }
        delta[std::size_t(node)] =
            boundary_displacement(fields, *pick, mesh.creation_nodes[std::size_t(node)], seg_spans);
        constrained[std::size_t(node)] = 1;
    }

    // Componentwise discrete-harmonic extension on the creation mesh.
    std::vector<int> free_index(std::size_t(n), -1);
    std::vector<int> free_nodes;
    for (int i = 0; i < n; ++i)
        if (!constrained[std::size_t(i)]) {
            free_index[std::size_t(i)] = int(free_nodes.size());
            free_nodes.push_back(i);
        }

    if (!free_nodes.empty()) {
        std::vector<Eigen::Triplet<double>> aii;
        Eigen::MatrixX2d rhs = Eigen::MatrixX2d::Zero(long(free_nodes.size()), 2);
        for (const auto& t : mesh.triangles) {
            const Point2& a = mesh.creation_nodes[std::size_t(t[0])];
            const Point2& b = mesh.creation_nodes[std::size_t(t[1])];
            const Point2& c = mesh.creation_nodes[std::size_t(t[2])];
            const double area2 = cross(b - a, c - a);
            if (area2 <= 0)
                throw Error("move_mesh: creation mesh has a non-positive element");
            const Point2 e[3] = {c - b, a - c, b - a}; // edge opposite each vertex
            for (int r = 0; r < 3; ++r)
                for (int s = 0; s < 3; ++s) {
                    const double k = dot(e[r], e[s]) / (2.0 * area2);
                    const int nr = t[std::size_t(r)], ns = t[std::size_t(s)];
                    if (free_index[std::size_t(nr)] < 0)
                        continue;
                    if (free_index[std::size_t(ns)] >= 0)
                        aii.emplace_back(free_index[std::size_t(nr)], free_index[std::size_t(ns)], k);
                    else {
                        rhs(free_index[std::size_t(nr)], 0) -= k * delta[std::size_t(ns)].x;
                        rhs(free_index[std::size_t(nr)], 1) -= k * delta[std::size_t(ns)].y;
                    }
                }
        }
        Eigen::SparseMatrix<double> K(long(free_nodes.size()), long(free_nodes.size()));
        K.setFromTriplets(aii.begin(), aii.end());
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(K);
        if (solver.info() != Eigen::Success)
            throw Error("move_mesh: harmonic extension factorization failed");
        const Eigen::MatrixX2d x = solver.solve(rhs);
        if (solver.info() != Eigen::Success)
            throw Error("move_mesh: harmonic extension solve failed");
        for (std::size_t i = 0; i < free_nodes.size(); ++i)
            delta[std::size_t(free_nodes[i])] = {x(long(i), 0), x(long(i), 1)};
    }

    if (max_principle_violation) {
        double lo_x = std::numeric_limits<double>::infinity(), hi_x = -lo_x;
        double lo_y = lo_x, hi_y = -lo_x;
        for (int i = 0; i < n; ++i)
            if (constrained[std::size_t(i)]) {
                lo_x = std::min(lo_x, delta[std::size_t(i)].x);
                hi_x = std::max(hi_x, delta[std::size_t(i)].x);
                lo_y = std::min(lo_y, delta[std::size_t(i)].y);
                hi_y = std::max(hi_y, delta[std::size_t(i)].y);
            }
        double v = 0;
        for (const int i : free_nodes) {
            v = std::max(v, delta[std::size_t(i)].x - hi_x);
            v = std::max(v, lo_x - delta[std::size_t(i)].x);
            v = std::max(v, delta[std::size_t(i)].y - hi_y);
            v = std::max(v, lo_y - delta[std::size_t(i)].y);
        }
        *max_principle_violation = v;
    }

    Mesh out = mesh;
    for (int i = 0; i < n; ++i)
        out.nodes[std::size_t(i)] = mesh.creation_nodes[std::size_t(i)] + delta[std::size_t(i)] * fraction;
    return out;
}

std::map<std::string, double> labeled_areas(const Mesh& mesh) {
    std::map<std::string, double> areas;
    for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
        const auto& t = mesh.triangles[e];
        const Point2& a = mesh.nodes[std::size_t(t[0])];
        const Point2& b = mesh.nodes[std::size_t(t[1])];
        const Point2& c = mesh.nodes[std::size_t(t[2])];
        areas[mesh.element_labels[e]] += std::abs(0.5 * cross(b - a, c - a));
    }
    return areas;
}

} // namespace growfem
