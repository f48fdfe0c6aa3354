#include "growfem/triangulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>
#include <vector>

#include "growfem/error.hpp"
#include "growfem/geometry.hpp"
#include "growfem/predicates.hpp"

namespace growfem {

namespace {

constexpr int kMaxInsertions = 400000;

struct Tri {
    std::array<int, 3> v;   // counterclockwise
    std::array<int, 3> adj; // adj[i] faces v[i]
    bool alive = true;
};

// Uniform hash grid over point indices, for diametral-disk queries.
class PointGrid {
public:
    explicit PointGrid(double cell) : cell_(cell) {}

    void add(int idx, const Point2& p) { cells_[key(p)].push_back(idx); }

    template <typename F>
    void for_each_in_disk(const Point2& c, double r, F&& f) const {
        const auto [ix0, iy0] = coords({c.x - r, c.y - r});
        const auto [ix1, iy1] = coords({c.x + r, c.y + r});
        for (std::int64_t ix = ix0; ix <= ix1; ++ix)
            for (std::int64_t iy = iy0; iy <= iy1; ++iy) {
                const auto it = cells_.find((std::uint64_t(ix) << 32) ^ std::uint64_t(std::uint32_t(iy)));
                if (it == cells_.end())
                    continue;
                for (const int idx : it->second)
                    f(idx);
            }
    }

private:
    std::pair<std::int64_t, std::int64_t> coords(const Point2& p) const {
        return {std::int64_t(std::floor(p.x / cell_)), std::int64_t(std::floor(p.y / cell_))};
    }
    std::uint64_t key(const Point2& p) const {
        const auto [ix, iy] = coords(p);
        return (std::uint64_t(ix) << 32) ^ std::uint64_t(std::uint32_t(iy));
    }

    double cell_;
    std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

class Builder {
public:
    Builder(const TriangulationInput& input, double max_area, double min_angle_deg,
            const std::vector<Point2>& outer_polygon)
        : input_(input), outer_(outer_polygon), max_area_(max_area),
          quality_bound_(1.0 / (2.0 * std::sin(min_angle_deg * std::numbers::pi / 180.0))),
          grid_(std::sqrt(max_area)) {}

    TriangulationResult run();

private:
    int locate(const Point2& p) const;
    std::vector<int> insert_point(const Point2& p);
    bool vertex_encroaches(const Point2& v, const Point2& a, const Point2& b) const;
    bool segment_encroached(const ConstraintEdge& s) const;
    void split_segment(std::size_t seg_idx, std::deque<std::size_t>& seg_queue);
    void enforce_gabriel();
    void refine();
    bool triangle_needs_refinement(const Tri& t, double& area_out) const;
    Point2 circumcenter(const Tri& t, bool& ok) const;

    const TriangulationInput& input_;
    const std::vector<Point2>& outer_;
    double max_area_;
    double quality_bound_;

    std::vector<Point2> pts; // super vertices first, then input, then Steiner
    std::vector<Tri> tris;
    std::vector<ConstraintEdge> segs; // indices into pts
    PointGrid grid_;
    int hint_ = 0;
    int insertions_ = 0;
};

int Builder::locate(const Point2& p) const {
    int t = hint_;
    for (int steps = 0; steps < int(tris.size()) + 8; ++steps) {
        if (!tris[std::size_t(t)].alive) {
            // Stale hint: fall back to any live triangle.
            t = -1;
            for (int i = int(tris.size()) - 1; i >= 0; --i)
                if (tris[std::size_t(i)].alive) {
                    t = i;
                    break;
                }
            if (t < 0)
                throw Error("triangulation: no live triangles");
            continue;
        }
        const Tri& tr = tris[std::size_t(t)];
        int next = -1;
        for (int i = 0; i < 3; ++i) {
            const Point2& a = pts[std::size_t(tr.v[std::size_t((i + 1) % 3)])];
            const Point2& b = pts[std::size_t(tr.v[std::size_t((i + 2) % 3)])];
            if (orient2d(a, b, p) < 0) {
                next = tr.adj[std::size_t(i)];
                break;
            }
        }
        if (next < 0)
            return t;
        t = next;
    }
    throw Error("triangulation: point location did not terminate");
}

std::vector<int> Builder::insert_point(const Point2& p) {
    if (++insertions_ > kMaxInsertions)
        throw Error("triangulation: refinement exceeded the insertion cap");
    const int t0 = locate(p);

    // Coincident vertex: nothing to insert.
    for (const int v : tris[std::size_t(t0)].v)
        if (pts[std::size_t(v)] == p)
            return {};

    const int pi = int(pts.size());
    pts.push_back(p);
    if (pi >= 3)
        grid_.add(pi, p);

    // Cavity: connected triangles whose circumcircle strictly contains p.
    std::vector<int> cavity;
    std::set<int> in_cavity;
    std::vector<int> stack{t0};
    in_cavity.insert(t0);
    while (!stack.empty()) {
        const int t = stack.back();
        stack.pop_back();
        cavity.push_back(t);
        for (const int n : tris[std::size_t(t)].adj) {
            if (n < 0 || in_cavity.count(n))
                continue;
            const Tri& tn = tris[std::size_t(n)];
            if (incircle(pts[std::size_t(tn.v[0])], pts[std::size_t(tn.v[1])], pts[std::size_t(tn.v[2])], p) > 0) {
                in_cavity.insert(n);
                stack.push_back(n);
            }
        }
    }

    // Boundary fan: directed edges (u,w) with the cavity on their left.
    struct BEdge {
        int u, w, outer;
    };
    std::vector<BEdge> boundary;
    for (const int t : cavity) {
        const Tri& tr = tris[std::size_t(t)];
        for (int i = 0; i < 3; ++i) {
            const int n = tr.adj[std::size_t(i)];
            if (n >= 0 && in_cavity.count(n))
                continue;
            boundary.push_back({tr.v[std::size_t((i + 1) % 3)], tr.v[std::size_t((i + 2) % 3)], n});
        }
    }
    for (const int t : cavity)
        tris[std::size_t(t)].alive = false;

    std::map<int, int> tri_of_start, tri_of_end;
    std::vector<int> created;
    for (const auto& be : boundary) {
        const int id = int(tris.size());
        tris.push_back({{be.u, be.w, pi}, {-1, -1, -1}, true});
        tris.back().adj[2] = be.outer;
        if (be.outer >= 0) {
            Tri& out = tris[std::size_t(be.outer)];
            for (int i = 0; i < 3; ++i) {
                const int ou = out.v[std::size_t((i + 1) % 3)];
                const int ow = out.v[std::size_t((i + 2) % 3)];
                if (ou == be.w && ow == be.u)
                    out.adj[std::size_t(i)] = id;
            }
        }
        tri_of_start[be.u] = id;
        tri_of_end[be.w] = id;
        created.push_back(id);
    }
    for (const auto& be : boundary) {
        const int id = tri_of_start.at(be.u);
        tris[std::size_t(id)].adj[0] = tri_of_start.at(be.w); // edge (w, p)
        tris[std::size_t(id)].adj[1] = tri_of_end.at(be.u);   // edge (p, u)
    }
    hint_ = created.front();
    return created;
}

bool Builder::vertex_encroaches(const Point2& v, const Point2& a, const Point2& b) const {
    if (v == a || v == b)
        return false;
    return dot(a - v, b - v) < 0;
}

bool Builder::segment_encroached(const ConstraintEdge& s) const {
    const Point2& a = pts[std::size_t(s.a)];
    const Point2& b = pts[std::size_t(s.b)];
    const Point2 mid = lerp(a, b, 0.5);
    const double r = 0.5 * dist(a, b);
    bool hit = false;
    grid_.for_each_in_disk(mid, r, [&](int idx) {
        if (!hit && idx != s.a && idx != s.b && vertex_encroaches(pts[std::size_t(idx)], a, b))
            hit = true;
    });
    return hit;
}

void Builder::split_segment(std::size_t seg_idx, std::deque<std::size_t>& seg_queue) {
    ConstraintEdge s = segs[seg_idx];
    const Point2& a = pts[std::size_t(s.a)];
    const Point2& b = pts[std::size_t(s.b)];
    const double len = dist(a, b);
    if (len < 1e-7 * std::sqrt(max_area_))
        throw Error("triangulation: constraint splitting did not terminate (subsegment length " +
                    std::to_string(len) + ")");

    // Concentric-shell split when exactly one endpoint is an original input
    // vertex (where several constraints may meet at an acute angle).
    const int n_input = int(input_.points.size());
    const bool a_orig = s.a < n_input + 3;
    const bool b_orig = s.b < n_input + 3;
    double t = 0.5;
    if (a_orig != b_orig) {
        const double shell = std::pow(2.0, std::round(std::log2(0.5 * len)));
        t = std::clamp(shell / len, 0.3, 0.7);
        if (b_orig)
            t = 1.0 - t;
    }
    const Point2 m = lerp(a, b, t);
    const auto created = insert_point(m);
    const int mi = created.empty() ? -1 : int(pts.size()) - 1;
    if (mi < 0)
        throw Error("triangulation: constraint split point already present");

    const double smid = s.s0 + t * (s.s1 - s.s0);
    const ConstraintEdge first{s.a, mi, s.marker, s.s0, smid};
    const ConstraintEdge second{mi, s.b, s.marker, smid, s.s1};
    segs[seg_idx] = first;
    segs.push_back(second);
    seg_queue.push_back(seg_idx);
    seg_queue.push_back(segs.size() - 1);
}

void Builder::enforce_gabriel() {
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < segs.size(); ++i)
        queue.push_back(i);
    while (!queue.empty()) {
        const std::size_t i = queue.front();
        queue.pop_front();
        if (segment_encroached(segs[i]))
            split_segment(i, queue);
    }
}

bool Builder::triangle_needs_refinement(const Tri& t, double& area_out) const {
    const Point2& a = pts[std::size_t(t.v[0])];
    const Point2& b = pts[std::size_t(t.v[1])];
    const Point2& c = pts[std::size_t(t.v[2])];
    for (const int v : t.v)
        if (v < 3)
            return false; // super-triangle vertex
    const Point2 centroid{(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
    if (!point_in_polygon(centroid, outer_))
        return false;
    const double area = 0.5 * cross(b - a, c - a);
    area_out = area;
    if (area > max_area_)
        return true;
    const double la = dist(b, c), lb = dist(c, a), lc = dist(a, b);
    const double lmin = std::min({la, lb, lc});
    if (lmin <= 0 || area <= 0)
        return true;
    const double circumradius = la * lb * lc / (4.0 * area);
    return circumradius / lmin > quality_bound_;
}

Point2 Builder::circumcenter(const Tri& t, bool& ok) const {
    const Point2& a = pts[std::size_t(t.v[0])];
    const Point2& b = pts[std::size_t(t.v[1])];
    const Point2& c = pts[std::size_t(t.v[2])];
    const double d = 2.0 * cross(b - a, c - a);
    if (std::abs(d) < 1e-30) {
        ok = false;
        return a;
    }
    const double b2 = dot(b - a, b - a);
    const double c2 = dot(c - a, c - a);
    const double ux = (  (c - a).y * b2 - (b - a).y * c2) / d;
    const double uy = (-((c - a).x) * b2 + (b - a).x * c2) / d;
    ok = true;
    return {a.x + ux, a.y + uy};
}

void Builder::refine() {
    std::deque<int> queue;
    for (int i = 0; i < int(tris.size()); ++i)
        if (tris[std::size_t(i)].alive)
            queue.push_back(i);
    std::set<int> skipped;

    while (!queue.empty()) {
        const int ti = queue.front();
        queue.pop_front();
        if (!tris[std::size_t(ti)].alive || skipped.count(ti))
            continue;
        double area = 0;
        if (!triangle_needs_refinement(tris[std::size_t(ti)], area))
            continue;

        bool ok = false;
        const Point2 cc = circumcenter(tris[std::size_t(ti)], ok);
        if (!ok) {
            skipped.insert(ti);
            continue;
        }

        // Circumcenter encroaching a constraint splits the constraint instead.
        std::vector<std::size_t> encroached;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            const auto& s = segs[i];
            if (vertex_encroaches(cc, pts[std::size_t(s.a)], pts[std::size_t(s.b)]))
                encroached.push_back(i);
        }
        if (!encroached.empty()) {
            const int before = int(tris.size());
            std::deque<std::size_t> seg_queue;
            for (const auto i : encroached)
                split_segment(i, seg_queue);
            while (!seg_queue.empty()) {
                const std::size_t i = seg_queue.front();
                seg_queue.pop_front();
                if (segment_encroached(segs[i]))
                    split_segment(i, seg_queue);
            }
            if (tris[std::size_t(ti)].alive)
                queue.push_back(ti);
            for (int i = before; i < int(tris.size()); ++i)
                queue.push_back(i);
            continue;
        }

        if (!point_in_polygon(cc, outer_)) {
            skipped.insert(ti);
            continue;
        }

        const int before = int(tris.size());
        insert_point(cc);
        for (int i = before; i < int(tris.size()); ++i)
            queue.push_back(i);
        if (tris[std::size_t(ti)].alive)
            queue.push_back(ti);
    }
}

TriangulationResult Builder::run() {
    const int n_input = int(input_.points.size());
    if (n_input < 3)
        throw Error("triangulation: needs at least 3 points");

    // Super triangle enclosing everything by a wide margin.
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& p : input_.points) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
    const double span = std::max({xmax - xmin, ymax - ymin, 1e-6});
    pts.push_back({cx - 20 * span, cy - 12 * span});
    pts.push_back({cx + 20 * span, cy - 12 * span});
    pts.push_back({cx, cy + 24 * span});
    tris.push_back({{0, 1, 2}, {-1, -1, -1}, true});

    for (const auto& p : input_.points) {
        const auto created = insert_point(p);
        if (created.empty())
            throw Error("triangulation: duplicate input point at (" + std::to_string(p.x) + ", " +
                        std::to_string(p.y) + ")");
    }

    segs.reserve(input_.constraints.size());
    for (const auto& c : input_.constraints) {
        if (c.a < 0 || c.a >= n_input || c.b < 0 || c.b >= n_input || c.a == c.b)
            throw Error("triangulation: invalid constraint indices");
        segs.push_back({c.a + 3, c.b + 3, c.marker, c.s0, c.s1});
    }

    enforce_gabriel();
    refine();

    // A Gabriel subsegment is a Delaunay edge; verify before emitting.
    std::set<std::pair<int, int>> edges;
    for (const auto& t : tris) {
        if (!t.alive)
            continue;
        for (int i = 0; i < 3; ++i) {
            const int u = t.v[std::size_t(i)], w = t.v[std::size_t((i + 1) % 3)];
            edges.insert({std::min(u, w), std::max(u, w)});
        }
    }
    for (const auto& s : segs)
        if (!edges.count({std::min(s.a, s.b), std::max(s.a, s.b)}))
            throw Error("triangulation: constraint edge lost during refinement");

    TriangulationResult out;
    out.points.assign(pts.begin() + 3, pts.end());
    for (const auto& t : tris) {
        if (!t.alive)
            continue;
        if (t.v[0] < 3 || t.v[1] < 3 || t.v[2] < 3)
            continue;
        const Point2& a = pts[std::size_t(t.v[0])];
        const Point2& b = pts[std::size_t(t.v[1])];
        const Point2& c = pts[std::size_t(t.v[2])];
        const Point2 centroid{(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
        if (!point_in_polygon(centroid, outer_))
            continue;
        std::array<int, 3> v{t.v[0] - 3, t.v[1] - 3, t.v[2] - 3};
        if (orient2d(a, b, c) < 0)
            std::swap(v[1], v[2]);
        out.triangles.push_back(v);
    }
    if (out.triangles.empty())
        throw Error("triangulation: no triangles inside the outer polygon");
    for (const auto& s : segs)
        out.constraints.push_back({s.a - 3, s.b - 3, s.marker, s.s0, s.s1});
    return out;
}

} // namespace

TriangulationResult conforming_delaunay(const TriangulationInput& input, double max_area, double min_angle_deg,
                                        const std::vector<Point2>& outer_polygon) {
    if (!(max_area > 0))
        throw Error("triangulation: max_area must be positive");
    if (min_angle_deg < 0 || min_angle_deg > 28)
        throw Error("triangulation: min_angle must be in [0, 28] degrees");
    if (outer_polygon.size() < 3)
        throw Error("triangulation: outer polygon needs at least 3 points");
    Builder b(input, max_area, min_angle_deg, outer_polygon);
    return b.run();
}

} // namespace growfem
