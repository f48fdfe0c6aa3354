#include "growfem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "growfem/error.hpp"
#include "growfem/predicates.hpp"

namespace growfem {

namespace {

std::string fmt_pt(const Point2& p) {
    std::ostringstream os;
    os << "(" << p.x << ", " << p.y << ")";
    return os.str();
}

} // namespace

void validate_curve(const Curve& c) {
    if (c.points.size() < 2)
        throw Error("curve '" + c.id + "': needs at least 2 points");
    for (const auto& p : c.points)
        if (!finite(p))
            throw Error("curve '" + c.id + "': non-finite coordinate");
    for (std::size_t i = 1; i < c.points.size(); ++i)
        if (dist(c.points[i - 1], c.points[i]) <= 1e-12)
            throw Error("curve '" + c.id + "': consecutive points coincide at index " + std::to_string(i));
    if (c.closed && dist(c.points.front(), c.points.back()) <= 1e-12)
        throw Error("curve '" + c.id + "': closed curve must not store the closing point");
}

std::vector<double> cumulative_lengths(const Curve& c) {
    std::vector<double> cum;
    cum.reserve(c.points.size() + 1);
    cum.push_back(0.0);
    for (std::size_t i = 1; i < c.points.size(); ++i)
        cum.push_back(cum.back() + dist(c.points[i - 1], c.points[i]));
    if (c.closed)
        cum.push_back(cum.back() + dist(c.points.back(), c.points.front()));
    return cum;
}

double curve_length(const Curve& c) {
    return cumulative_lengths(c).back();
}

Point2 point_at(const Curve& c, double s) {
    if (s < -1e-12 || s > 1.0 + 1e-12)
        throw Error("point_at: parameter " + std::to_string(s) + " outside [0,1]");
    s = std::clamp(s, 0.0, 1.0);
    const auto cum = cumulative_lengths(c);
    const double target = s * cum.back();
    auto it = std::upper_bound(cum.begin(), cum.end(), target);
    std::size_t i = (it == cum.begin()) ? 0 : std::size_t(it - cum.begin() - 1);
    if (i >= cum.size() - 1)
        i = cum.size() - 2;
    const Point2& a = c.points[i % c.points.size()];
    const Point2& b = c.points[(i + 1) % c.points.size()];
    const double len = cum[i + 1] - cum[i];
    const double t = len > 0 ? (target - cum[i]) / len : 0.0;
    return lerp(a, b, t);
}

const Curve& StagedGeometry::curve(const std::string& id) const {
    for (const auto& c : curves)
        if (c.id == id)
            return c;
    throw Error("no curve with id '" + id + "'");
}

bool StagedGeometry::has_curve(const std::string& id) const {
    return std::any_of(curves.begin(), curves.end(), [&](const Curve& c) { return c.id == id; });
}

double segment_length(const CurveSegment& seg) {
    double L = 0;
    for (std::size_t i = 1; i < seg.points.size(); ++i)
        L += dist(seg.points[i - 1], seg.points[i]);
    return L;
}

const CurveSegment& SegmentedGeometry::segment(const std::string& parent, int index) const {
    auto it = segments.find(parent);
    if (it == segments.end())
        throw Error("no segments for curve '" + parent + "'");
    if (index < 0 || index >= int(it->second.size()))
        throw Error("curve '" + parent + "': no segment " + std::to_string(index));
    return it->second[std::size_t(index)];
}

int SegmentedGeometry::interior_junction_count() const {
    int n = 0;
    for (const auto& j : junctions)
        if (j.interior)
            ++n;
    return n;
}

Curve resample_uniform(const Curve& curve, int n) {
    validate_curve(curve);
    if (n < 2)
        throw Error("resample_uniform: n must be >= 2, got " + std::to_string(n));
    const auto cum = cumulative_lengths(curve);
    const double L = cum.back();
    if (L <= 0)
        throw Error("resample_uniform: curve '" + curve.id + "' has zero length");

    Curve out;
    out.id = curve.id;
    out.closed = curve.closed;
    out.points.reserve(std::size_t(n));

    const int n_edges = int(cum.size()) - 1;
    int edge = 0;
    const double step = curve.closed ? L / n : L / (n - 1);
    // Targets landing this close to an existing vertex reuse it, which makes
    // resampling an already-uniform polyline reproduce it exactly.
    const double snap = std::min(1e-7 * L, 0.25 * step);
    for (int k = 0; k < n; ++k) {
        if (k == 0) {
            out.points.push_back(curve.points.front());
            continue;
        }
        if (!curve.closed && k == n - 1) {
            out.points.push_back(curve.points.back());
            continue;
        }
        const double target = step * k;
        while (edge < n_edges - 1 && cum[std::size_t(edge) + 1] < target)
            ++edge;
        const Point2& a = curve.points[std::size_t(edge) % curve.points.size()];
        const Point2& b = curve.points[(std::size_t(edge) + 1) % curve.points.size()];
        if (std::abs(target - cum[std::size_t(edge)]) <= snap) {
            out.points.push_back(a);
            continue;
        }
        if (std::abs(cum[std::size_t(edge) + 1] - target) <= snap) {
            out.points.push_back(b);
            continue;
        }
        const double elen = cum[std::size_t(edge) + 1] - cum[std::size_t(edge)];
        const double t = elen > 0 ? (target - cum[std::size_t(edge)]) / elen : 0.0;
        out.points.push_back(lerp(a, b, t));
    }
    return out;
}

namespace {

struct Edge {
    Point2 a, b;
};

std::vector<Edge> curve_edges(const Curve& c) {
    std::vector<Edge> e;
    const std::size_t n = c.points.size();
    for (std::size_t i = 0; i + 1 < n; ++i)
        e.push_back({c.points[i], c.points[i + 1]});
    if (c.closed)
        e.push_back({c.points[n - 1], c.points[0]});
    return e;
}

// Closest approach between two segments: distance, parameters on each, and
// the closest points. Exact crossings report distance 0 at the crossing.
struct Approach {
    double d = 0;
    double ta = 0, tb = 0;
    Point2 pa, pb;
    bool proper = false;
    double extent = 0; // span of the within-tol contact run along the pair
};

double point_seg_param(const Point2& p, const Edge& e) {
    const Point2 d = e.b - e.a;
    const double l2 = dot(d, d);
    if (l2 <= 0)
        return 0.0;
    return std::clamp(dot(p - e.a, d) / l2, 0.0, 1.0);
}

Approach segment_approach(const Edge& ea, const Edge& eb, double tol = 0.0) {
    const double o1 = orient2d(ea.a, ea.b, eb.a);
    const double o2 = orient2d(ea.a, ea.b, eb.b);
    const double o3 = orient2d(eb.a, eb.b, ea.a);
    const double o4 = orient2d(eb.a, eb.b, ea.b);
    if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) {
        const double c1 = cross(ea.b - ea.a, eb.a - ea.a);
        const double c2 = cross(ea.b - ea.a, eb.b - ea.a);
        const double t = std::clamp(c1 / (c1 - c2), 0.0, 1.0); // parameter on eb
        Approach r;
        r.proper = true;
        r.d = 0;
        r.tb = t;
        r.pb = lerp(eb.a, eb.b, t);
        r.pa = r.pb;
        r.ta = point_seg_param(r.pb, ea);
        return r;
    }
    // No proper crossing: minimum over endpoint projections. Every
    // projection within tol contributes to the contact-run extent, which is
    // what distinguishes a touch from a grazing overlap.
    Approach best;
    best.d = std::numeric_limits<double>::infinity();
    std::vector<Point2> contact;
    auto consider = [&](double ta, double tb) {
        const Point2 pa = lerp(ea.a, ea.b, ta);
        const Point2 pb = lerp(eb.a, eb.b, tb);
        const double d = dist(pa, pb);
        if (d < best.d) {
            best.d = d;
            best.ta = ta;
            best.tb = tb;
            best.pa = pa;
            best.pb = pb;
        }
        if (d <= tol)
            contact.push_back(lerp(pa, pb, 0.5));
    };
    consider(0.0, point_seg_param(ea.a, eb));
    consider(1.0, point_seg_param(ea.b, eb));
    consider(point_seg_param(eb.a, ea), 0.0);
    consider(point_seg_param(eb.b, ea), 1.0);
    for (std::size_t i = 0; i < contact.size(); ++i)
        for (std::size_t j = i + 1; j < contact.size(); ++j)
            best.extent = std::max(best.extent, dist(contact[i], contact[j]));
    return best;
}

struct Candidate {
    Point2 point;
    double pa = 0, pb = 0;
    double d = 0;
    bool proper = false;
    double extent = 0;
    int ei = 0, ej = 0;
};

struct Cluster {
    std::vector<Candidate> members;
    double spread = 0;
    Candidate rep;
};

// Pairwise candidates clustered by edge adjacency; spread measures how far
// the contact run extends (used to reject grazing contact downstream).
std::vector<Cluster> intersection_clusters(const Curve& a, const Curve& b, double tol) {
    validate_curve(a);
    validate_curve(b);
    if (!(tol > 0))
        throw Error("find_intersections: tol must be > 0");
    const auto ea = curve_edges(a);
    const auto eb = curve_edges(b);
    const auto cuma = cumulative_lengths(a);
    const auto cumb = cumulative_lengths(b);
    const double La = cuma.back(), Lb = cumb.back();

    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < ea.size(); ++i) {
        for (std::size_t j = 0; j < eb.size(); ++j) {
            const Approach ap = segment_approach(ea[i], eb[j], tol);
            if (!(ap.d <= tol))
                continue;
            Candidate c;
            c.proper = ap.proper;
            c.d = ap.d;
            c.extent = ap.extent;
            c.point = ap.proper ? ap.pa : lerp(ap.pa, ap.pb, 0.5);
            c.pa = (cuma[i] + ap.ta * (cuma[i + 1] - cuma[i])) / La;
            c.pb = (cumb[j] + ap.tb * (cumb[j + 1] - cumb[j])) / Lb;
            c.ei = int(i);
            c.ej = int(j);
            cands.push_back(c);
        }
    }

    // Union-find over candidates adjacent in the (edge_a, edge_b) grid.
    std::vector<int> parent(cands.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[std::size_t(x)] == x ? x : parent[std::size_t(x)] = find(parent[std::size_t(x)]); };
    auto adj = [&](int u, int v, int n, bool wrap) {
        int d = std::abs(u - v);
        if (wrap)
            d = std::min(d, n - d);
        return d <= 1;
    };
    for (std::size_t i = 0; i < cands.size(); ++i)
        for (std::size_t j = i + 1; j < cands.size(); ++j)
            if (adj(cands[i].ei, cands[j].ei, int(ea.size()), a.closed) &&
                adj(cands[i].ej, cands[j].ej, int(eb.size()), b.closed))
                parent[std::size_t(find(int(i)))] = find(int(j));

    std::map<int, Cluster> by_root;
    for (std::size_t i = 0; i < cands.size(); ++i)
        by_root[find(int(i))].members.push_back(cands[i]);

    std::vector<Cluster> out;
    for (auto& [root, cl] : by_root) {
        for (const auto& m : cl.members) {
            cl.spread = std::max(cl.spread, m.extent);
            for (const auto& m2 : cl.members)
                cl.spread = std::max(cl.spread, dist(m.point, m2.point));
        }
        cl.rep = cl.members.front();
        for (const auto& m : cl.members) {
            const bool better = (m.proper && !cl.rep.proper) ||
                                (m.proper == cl.rep.proper && (m.d < cl.rep.d || (m.d == cl.rep.d && m.pa < cl.rep.pa)));
            if (better)
                cl.rep = m;
        }
        out.push_back(cl);
    }
    std::sort(out.begin(), out.end(), [](const Cluster& x, const Cluster& y) { return x.rep.pa < y.rep.pa; });
    return out;
}

} // namespace

std::vector<Intersection> find_intersections(const Curve& a, const Curve& b, double tol) {
    std::vector<Intersection> out;
    for (const auto& cl : intersection_clusters(a, b, tol))
        out.push_back({cl.rep.point, cl.rep.pa, cl.rep.pb});
    return out;
}

namespace {

struct RawHit {
    Point2 point;
    std::vector<std::pair<std::string, double>> incidences;
    double spread = 0;
    std::string pair_desc;
};

// Splits one curve at the given (param, point) list, snapping to existing
// vertices within tol and inserting the junction point otherwise.
struct SplitPoint {
    double param;
    Point2 point;
    int junction_id;
};

struct SplitCurveResult {
    Curve updated;
    std::vector<std::size_t> junction_vertex; // vertex index per split point
};

SplitCurveResult split_curve_vertices(const Curve& c, std::vector<SplitPoint> splits, double tol) {
    std::sort(splits.begin(), splits.end(), [](const SplitPoint& a, const SplitPoint& b) { return a.param < b.param; });
    const auto cum = cumulative_lengths(c);
    const double L = cum.back();

    // Per edge: insertions ordered along the edge.
    const std::size_t n_edges = cum.size() - 1;
    std::vector<std::vector<std::pair<double, int>>> insertions(n_edges); // (t within edge, split idx)
    std::vector<int> at_vertex(c.points.size(), -1);                      // split idx snapped to vertex
    for (std::size_t k = 0; k < splits.size(); ++k) {
        const double target = splits[k].param * L;
        // Nearest vertex by arc length.
        std::size_t vi = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < c.points.size(); ++i) {
            const double d = std::abs(cum[i] - target);
            if (d < best) {
                best = d;
                vi = i;
            }
        }
        if (c.closed && std::abs(L - target) < best) {
            best = std::abs(L - target);
            vi = 0;
        }
        if (best <= tol || dist(c.points[vi], splits[k].point) <= tol) {
            at_vertex[vi] = int(k);
            continue;
        }
        // Locate containing edge.
        std::size_t e = 0;
        while (e + 1 < n_edges && cum[e + 1] < target)
            ++e;
        const double elen = cum[e + 1] - cum[e];
        const double t = elen > 0 ? (target - cum[e]) / elen : 0.0;
        insertions[e].push_back({t, int(k)});
    }
    for (auto& ins : insertions)
        std::sort(ins.begin(), ins.end());

    SplitCurveResult r;
    r.updated.id = c.id;
    r.updated.closed = c.closed;
    r.junction_vertex.assign(splits.size(), 0);
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        Point2 p = c.points[i];
        if (at_vertex[i] >= 0) {
            p = splits[std::size_t(at_vertex[i])].point; // snap onto the canonical junction point
            r.junction_vertex[std::size_t(at_vertex[i])] = r.updated.points.size();
        }
        r.updated.points.push_back(p);
        if (i + 1 < c.points.size()) {
            for (const auto& [t, k] : insertions[i]) {
                r.junction_vertex[std::size_t(k)] = r.updated.points.size();
                r.updated.points.push_back(splits[std::size_t(k)].point);
            }
        }
    }
    // Closing edge of a closed curve.
    if (c.closed)
        for (const auto& [t, k] : insertions[n_edges - 1]) {
            r.junction_vertex[std::size_t(k)] = r.updated.points.size();
            r.updated.points.push_back(splits[std::size_t(k)].point);
        }
    return r;
}

} // namespace

SegmentedGeometry segment_at_intersections(const StagedGeometry& geometry, double tol) {
    for (const auto& c : geometry.curves)
        validate_curve(c);

    // Gather clusters over all curve pairs.
    std::vector<RawHit> hits;
    for (std::size_t i = 0; i < geometry.curves.size(); ++i) {
        for (std::size_t j = i + 1; j < geometry.curves.size(); ++j) {
            const Curve& a = geometry.curves[i];
            const Curve& b = geometry.curves[j];
            for (const auto& cl : intersection_clusters(a, b, tol)) {
                RawHit h;
                h.point = cl.rep.point;
                h.incidences = {{a.id, cl.rep.pa}, {b.id, cl.rep.pb}};
                h.spread = cl.spread;
                h.pair_desc = a.id + " x " + b.id;
                hits.push_back(h);
            }
        }
    }

    // Merge hits that coincide within tol into junction records.
    std::vector<int> parent(hits.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[std::size_t(x)] == x ? x : parent[std::size_t(x)] = find(parent[std::size_t(x)]); };
    for (std::size_t i = 0; i < hits.size(); ++i)
        for (std::size_t j = i + 1; j < hits.size(); ++j)
            if (dist(hits[i].point, hits[j].point) <= tol)
                parent[std::size_t(find(int(i)))] = find(int(j));

    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < hits.size(); ++i)
        groups[find(int(i))].push_back(i);

    SegmentedGeometry out;
    out.stage_time = geometry.stage_time;

    struct PendingJunction {
        Point2 point;
        std::vector<std::pair<std::string, double>> incidences;
    };
    std::vector<PendingJunction> pending;
    for (const auto& [root, idxs] : groups) {
        PendingJunction pj;
        double max_spread = 0;
        std::string desc;
        for (const auto i : idxs) {
            max_spread = std::max(max_spread, hits[i].spread);
            desc = hits[i].pair_desc;
            for (const auto& inc : hits[i].incidences)
                pj.incidences.push_back(inc);
        }
        if (max_spread > 16 * tol)
            throw Error("grazing contact between " + desc + " near " + fmt_pt(hits[idxs.front()].point) +
                        ": contact run of extent " + std::to_string(max_spread) +
                        " cannot be resolved into a single split point");
        pj.point = hits[idxs.front()].point;
        // Prefer an existing curve vertex as the canonical junction point.
        bool snapped = false;
        for (const auto& c : geometry.curves) {
            for (const auto& v : c.points) {
                if (dist(v, pj.point) <= tol) {
                    pj.point = v;
                    snapped = true;
                    break;
                }
            }
            if (snapped)
                break;
        }
        // Dedup incidences per curve (arc distance below 4*tol collapses).
        std::sort(pj.incidences.begin(), pj.incidences.end());
        std::vector<std::pair<std::string, double>> dedup;
        for (const auto& inc : pj.incidences) {
            bool merged = false;
            for (auto& d : dedup) {
                if (d.first != inc.first)
                    continue;
                const double L = curve_length(geometry.curve(inc.first));
                if (std::abs(d.second - inc.second) * L <= 4 * tol) {
                    merged = true;
                    break;
                }
            }
            if (!merged)
                dedup.push_back(inc);
        }
        pj.incidences = dedup;
        pending.push_back(pj);
    }

    // Split every curve at its incidences.
    for (const auto& c : geometry.curves) {
        std::vector<SplitPoint> splits;
        for (std::size_t k = 0; k < pending.size(); ++k)
            for (const auto& inc : pending[k].incidences)
                if (inc.first == c.id)
                    splits.push_back({inc.second, pending[k].point, int(k)});

        auto res = split_curve_vertices(c, splits, tol);
        const Curve& u = res.updated;
        out.source.curves.push_back(u);

        const auto cum = cumulative_lengths(u);
        const double L = cum.back();

        // Junction vertex indices define the segment boundaries.
        std::set<std::size_t> cuts(res.junction_vertex.begin(), res.junction_vertex.end());
        std::vector<std::size_t> cut_list(cuts.begin(), cuts.end());
        std::sort(cut_list.begin(), cut_list.end());

        auto is_cut = [&](std::size_t v) { return cuts.count(v) > 0; };
        std::vector<CurveSegment> segs;
        if (!u.closed) {
            std::vector<std::size_t> bounds;
            bounds.push_back(0);
            for (const auto v : cut_list)
                if (v != 0 && v != u.points.size() - 1)
                    bounds.push_back(v);
            bounds.push_back(u.points.size() - 1);
            for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
                CurveSegment s;
                s.parent_id = u.id;
                s.segment_index = int(b);
                s.points.assign(u.points.begin() + long(bounds[b]), u.points.begin() + long(bounds[b + 1]) + 1);
                s.start_is_junction = is_cut(bounds[b]);
                s.end_is_junction = is_cut(bounds[b + 1]);
                s.parent_s0 = cum[bounds[b]] / L;
                s.parent_s1 = cum[bounds[b + 1]] / L;
                segs.push_back(std::move(s));
            }
        } else if (cut_list.empty()) {
            CurveSegment s;
            s.parent_id = u.id;
            s.segment_index = 0;
            s.points = u.points;
            s.points.push_back(u.points.front()); // explicit seam
            s.parent_s0 = 0.0;
            s.parent_s1 = 1.0;
            segs.push_back(std::move(s));
        } else {
            // Closed curve with junctions: segments wrap from cut to cut.
            for (std::size_t b = 0; b < cut_list.size(); ++b) {
                const std::size_t v0 = cut_list[b];
                const std::size_t v1 = cut_list[(b + 1) % cut_list.size()];
                CurveSegment s;
                s.parent_id = u.id;
                s.segment_index = int(b);
                s.start_is_junction = true;
                s.end_is_junction = true;
                s.parent_s0 = cum[v0] / L;
                s.parent_s1 = (b + 1 < cut_list.size()) ? cum[v1] / L : 1.0 + cum[v1] / L;
                std::size_t v = v0;
                s.points.push_back(u.points[v]);
                do {
                    v = (v + 1) % u.points.size();
                    s.points.push_back(u.points[v]);
                } while (v != v1);
                segs.push_back(std::move(s));
            }
        }
        out.segments[u.id] = std::move(segs);
    }

    // Finalize junction records.
    for (const auto& pj : pending) {
        JunctionRecord jr;
        jr.point = pj.point;
        jr.incidences = pj.incidences;
        for (const auto& [cid, s] : pj.incidences) {
            const Curve& c = geometry.curve(cid);
            if (c.closed) {
                jr.interior = true;
            } else {
                const double L = curve_length(c);
                if (s * L > tol && (1.0 - s) * L > tol)
                    jr.interior = true;
            }
        }
        out.junctions.push_back(jr);
    }
    std::sort(out.junctions.begin(), out.junctions.end(), [](const JunctionRecord& a, const JunctionRecord& b) {
        return std::make_pair(a.point.x, a.point.y) < std::make_pair(b.point.x, b.point.y);
    });

    out.source.stage_time = geometry.stage_time;
    out.source.subdomains = geometry.subdomains;
    return out;
}

double polygon_area(const std::vector<Point2>& loop) {
    if (loop.size() < 3)
        throw Error("polygon_area: loop needs at least 3 points");
    double s = 0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        const Point2& a = loop[i];
        const Point2& b = loop[(i + 1) % loop.size()];
        s += a.x * b.y - b.x * a.y;
    }
    return std::abs(0.5 * s);
}

double polygon_area_checked(const std::vector<Point2>& loop, std::vector<std::string>& warnings) {
    const double area = polygon_area(loop);
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == i || (j + 1) % n == i || (i + 1) % n == j)
                continue;
            const Edge ei{loop[i], loop[(i + 1) % n]};
            const Edge ej{loop[j], loop[(j + 1) % n]};
            if (segment_approach(ei, ej).proper) {
                warnings.push_back("polygon_area: self-intersecting loop (edges " + std::to_string(i) + " and " +
                                   std::to_string(j) + "); signed-formula area returned");
                return area;
            }
        }
    }
    return area;
}

namespace {

// Polyline portion of a curve between parameters s0 < s1.
std::vector<Point2> curve_portion(const Curve& c, double s0, double s1) {
    const auto cum = cumulative_lengths(c);
    const double L = cum.back();
    const double t0 = s0 * L, t1 = s1 * L;
    std::vector<Point2> pts;
    pts.push_back(point_at(c, s0));
    for (std::size_t i = 0; i < cum.size(); ++i) {
        if (cum[i] > t0 + 1e-12 * std::max(1.0, L) && cum[i] < t1 - 1e-12 * std::max(1.0, L))
            pts.push_back(c.points[i % c.points.size()]);
    }
    pts.push_back(point_at(c, s1));
    return pts;
}

} // namespace

std::vector<Point2> subdomain_loop_polygon(const StagedGeometry& g, const std::string& subdomain_id, double tol) {
    auto it = g.subdomains.find(subdomain_id);
    if (it == g.subdomains.end())
        throw Error("no subdomain '" + subdomain_id + "'");
    std::vector<Point2> loop;
    for (const auto& piece : it->second) {
        auto pts = curve_portion(g.curve(piece.curve_id), piece.s0, piece.s1);
        if (piece.orientation < 0)
            std::reverse(pts.begin(), pts.end());
        if (!loop.empty()) {
            if (dist(loop.back(), pts.front()) > tol)
                throw Error("subdomain '" + subdomain_id + "': loop not closed, gap of " +
                            std::to_string(dist(loop.back(), pts.front())) + " before curve '" + piece.curve_id + "'");
            loop.pop_back(); // drop duplicate join point
        }
        loop.insert(loop.end(), pts.begin(), pts.end());
    }
    if (loop.size() < 4 || dist(loop.front(), loop.back()) > tol)
        throw Error("subdomain '" + subdomain_id + "': loop does not close");
    loop.pop_back();
    return loop;
}

namespace {

struct DirectedPiece {
    std::string curve_id;
    double s0, s1; // traversal order (s0 may exceed s1 for reversed pieces)
};

} // namespace

std::vector<Point2> outer_boundary_polygon(const StagedGeometry& g, double tol) {
    // Net signed coverage per curve over elementary parameter intervals;
    // internal pieces are traversed once each way and cancel.
    std::vector<DirectedPiece> outer;
    for (const auto& c : g.curves) {
        std::set<double> breaks = {0.0, 1.0};
        for (const auto& [sid, pieces] : g.subdomains)
            for (const auto& p : pieces)
                if (p.curve_id == c.id) {
                    breaks.insert(p.s0);
                    breaks.insert(p.s1);
                }
        std::vector<double> bs(breaks.begin(), breaks.end());
        for (std::size_t i = 0; i + 1 < bs.size(); ++i) {
            const double mid = 0.5 * (bs[i] + bs[i + 1]);
            int cover = 0;
            for (const auto& [sid, pieces] : g.subdomains)
                for (const auto& p : pieces)
                    if (p.curve_id == c.id && p.s0 - 1e-14 <= mid && mid <= p.s1 + 1e-14)
                        cover += p.orientation;
            if (cover > 1 || cover < -1)
                throw Error("curve '" + c.id + "': interval covered " + std::to_string(cover) + " times by subdomain loops");
            if (cover == 1)
                outer.push_back({c.id, bs[i], bs[i + 1]});
            else if (cover == -1)
                outer.push_back({c.id, bs[i + 1], bs[i]});
        }
    }
    if (outer.empty())
        throw Error("no outer boundary pieces found");

    // Chain the directed pieces into one loop.
    auto piece_pts = [&](const DirectedPiece& p) {
        auto pts = curve_portion(g.curve(p.curve_id), std::min(p.s0, p.s1), std::max(p.s0, p.s1));
        if (p.s0 > p.s1)
            std::reverse(pts.begin(), pts.end());
        return pts;
    };
    std::vector<bool> used(outer.size(), false);
    std::vector<Point2> loop = piece_pts(outer[0]);
    used[0] = true;
    for (std::size_t count = 1; count < outer.size(); ++count) {
        bool advanced = false;
        for (std::size_t i = 0; i < outer.size(); ++i) {
            if (used[i])
                continue;
            auto pts = piece_pts(outer[i]);
            if (dist(loop.back(), pts.front()) <= tol) {
                loop.pop_back();
                loop.insert(loop.end(), pts.begin(), pts.end());
                used[i] = true;
                advanced = true;
                break;
            }
        }
        if (!advanced)
            throw Error("outer boundary pieces do not chain into a single loop");
    }
    if (dist(loop.front(), loop.back()) > tol)
        throw Error("outer boundary loop does not close");
    loop.pop_back();
    return loop;
}

void validate_staged_geometry(const StagedGeometry& g, double rel_tol) {
    for (const auto& c : g.curves)
        validate_curve(c);
    if (g.subdomains.empty())
        throw Error("geometry has no subdomains");
    double sum = 0;
    for (const auto& [sid, pieces] : g.subdomains)
        sum += polygon_area(subdomain_loop_polygon(g, sid));
    const double outer = polygon_area(outer_boundary_polygon(g));
    if (std::abs(sum - outer) > rel_tol * outer)
        throw Error("subdomain areas sum to " + std::to_string(sum) + " but outer boundary encloses " +
                    std::to_string(outer));
}

bool point_in_polygon(const Point2& p, const std::vector<Point2>& loop) {
    bool inside = false;
    const std::size_t n = loop.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2& a = loop[i];
        const Point2& b = loop[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double xint = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < xint)
                inside = !inside;
        }
    }
    return inside;
}

} // namespace growfem
