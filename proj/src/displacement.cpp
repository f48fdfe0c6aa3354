#include "growfem/displacement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "growfem/error.hpp"

namespace growfem {

std::string DisplacementField::segment_id() const {
    if (segment_index < 0)
        return parent_id;
    return parent_id + "#" + std::to_string(segment_index);
}

Curve segment_as_curve(const CurveSegment& seg) {
    Curve c;
    c.id = seg.parent_id + "#" + std::to_string(seg.segment_index);
    c.points = seg.points;
    return c;
}

void validate_field(const DisplacementField& field) {
    if (field.rows.size() < 2)
        throw Error("displacement field '" + field.segment_id() + "': needs at least 2 rows");
    for (std::size_t i = 0; i < field.rows.size(); ++i) {
        const auto& r = field.rows[i];
        if (!std::isfinite(r.key1) || !std::isfinite(r.key2) || !std::isfinite(r.dx) || !std::isfinite(r.dy))
            throw Error("displacement field '" + field.segment_id() + "': non-finite row " + std::to_string(i));
        if (field.keying == Keying::Parameter) {
            if (r.key1 < 0.0 || r.key1 > 1.0)
                throw Error("displacement field '" + field.segment_id() + "': parameter outside [0,1] at row " +
                            std::to_string(i));
            if (i > 0 && r.key1 <= field.rows[i - 1].key1)
                throw Error("displacement field '" + field.segment_id() + "': parameters not increasing at row " +
                            std::to_string(i));
        }
    }
}

DisplacementField uniform_displacement_field(const Curve& gamma_t, const Curve& gamma_t1, int n, Keying keying) {
    if (gamma_t.closed != gamma_t1.closed)
        throw Error("displacement: open/closed mismatch between '" + gamma_t.id + "' and '" + gamma_t1.id + "'");
    const Curve r0 = resample_uniform(gamma_t, n);
    const Curve r1 = resample_uniform(gamma_t1, n);

    DisplacementField field;
    field.parent_id = gamma_t.id;
    field.keying = keying;
    field.closed = gamma_t.closed;
    field.rows.reserve(std::size_t(n));
    for (int i = 0; i < n; ++i) {
        const Point2& p0 = r0.points[std::size_t(i)];
        const Point2& p1 = r1.points[std::size_t(i)];
        DisplacementRow row;
        if (keying == Keying::Parameter) {
            row.key1 = gamma_t.closed ? double(i) / n : double(i) / (n - 1);
        } else {
            row.key1 = p0.x;
            row.key2 = p0.y;
        }
        row.dx = p1.x - p0.x;
        row.dy = p1.y - p0.y;
        field.rows.push_back(row);
    }
    return field;
}

DisplacementField uniform_displacement_field(const CurveSegment& seg_t, const CurveSegment& seg_t1, int n,
                                             Keying keying) {
    if (seg_t.parent_id != seg_t1.parent_id || seg_t.segment_index != seg_t1.segment_index)
        throw Error("displacement: segments do not correspond ('" + seg_t.parent_id + "'#" +
                    std::to_string(seg_t.segment_index) + " vs '" + seg_t1.parent_id + "'#" +
                    std::to_string(seg_t1.segment_index) + ")");
    DisplacementField field = uniform_displacement_field(segment_as_curve(seg_t), segment_as_curve(seg_t1), n, keying);
    field.parent_id = seg_t.parent_id;
    field.segment_index = seg_t.segment_index;
    return field;
}

double boundary_parameter(const CurveSegment& segment, const Point2& p, double tol) {
    const Curve c = segment_as_curve(segment);
    const auto cum = cumulative_lengths(c);
    const double L = cum.back();
    double best_d = std::numeric_limits<double>::infinity();
    double best_s = 0;
    for (std::size_t i = 0; i + 1 < c.points.size(); ++i) {
        const Point2& a = c.points[i];
        const Point2& b = c.points[i + 1];
        const Point2 ab = b - a;
        const double l2 = dot(ab, ab);
        const double t = l2 > 0 ? std::clamp(dot(p - a, ab) / l2, 0.0, 1.0) : 0.0;
        const double d = dist(p, lerp(a, b, t));
        if (d < best_d) {
            best_d = d;
            best_s = (cum[i] + t * (cum[i + 1] - cum[i])) / L;
        }
    }
    if (best_d > tol)
        throw Error("boundary_parameter: point off segment '" + c.id + "' by " + std::to_string(best_d));
    return best_s;
}

Point2 evaluate_displacement(const DisplacementField& field, double s) {
    if (field.keying != Keying::Parameter)
        throw Error("displacement field '" + field.segment_id() + "' is coordinate-keyed; parameter query invalid");
    if (s < -1e-12 || s > 1.0 + 1e-12)
        throw Error("displacement query " + std::to_string(s) + " outside [0,1] on '" + field.segment_id() + "'");
    s = std::clamp(s, 0.0, 1.0);
    const auto& rows = field.rows;

    // Exact key hits return the row verbatim.
    auto it = std::lower_bound(rows.begin(), rows.end(), s,
                               [](const DisplacementRow& r, double v) { return r.key1 < v; });
    if (it != rows.end() && it->key1 == s)
        return {it->dx, it->dy};

    if (field.closed) {
        // Keys cover [0, 1); the tail interval wraps to row 0.
        if (s < rows.front().key1 || s >= rows.back().key1) {
            const auto& a = rows.back();
            const auto& b = rows.front();
            const double span = 1.0 - a.key1 + b.key1;
            const double off = s >= a.key1 ? s - a.key1 : s + 1.0 - a.key1;
            const double t = span > 0 ? off / span : 0.0;
            return {a.dx + (b.dx - a.dx) * t, a.dy + (b.dy - a.dy) * t};
        }
    } else {
        if (s <= rows.front().key1)
            return {rows.front().dx, rows.front().dy};
        if (s >= rows.back().key1)
            return {rows.back().dx, rows.back().dy};
    }
    const std::size_t hi = std::size_t(it - rows.begin());
    const auto& a = rows[hi - 1];
    const auto& b = rows[hi];
    const double t = (s - a.key1) / (b.key1 - a.key1);
    return {a.dx + (b.dx - a.dx) * t, a.dy + (b.dy - a.dy) * t};
}

Point2 evaluate_displacement(const DisplacementField& field, const Point2& p, double max_lateral) {
    if (field.keying != Keying::Coordinate)
        throw Error("displacement field '" + field.segment_id() + "' is parameter-keyed; coordinate query invalid");
    const auto& rows = field.rows;
    for (const auto& r : rows)
        if (p.x == r.key1 && p.y == r.key2)
            return {r.dx, r.dy};

    const std::size_t n_edges = rows.size() - 1 + (field.closed ? 1 : 0);
    double best_d = std::numeric_limits<double>::infinity();
    Point2 best_val{0, 0};
    for (std::size_t i = 0; i < n_edges; ++i) {
        const auto& ra = rows[i];
        const auto& rb = rows[(i + 1) % rows.size()];
        const Point2 a{ra.key1, ra.key2};
        const Point2 b{rb.key1, rb.key2};
        const Point2 ab = b - a;
        const double l2 = dot(ab, ab);
        const double t = l2 > 0 ? std::clamp(dot(p - a, ab) / l2, 0.0, 1.0) : 0.0;
        const double d = dist(p, lerp(a, b, t));
        if (d < best_d) {
            best_d = d;
            best_val = {ra.dx + (rb.dx - ra.dx) * t, ra.dy + (rb.dy - ra.dy) * t};
        }
    }
    if (best_d > max_lateral)
        throw Error("displacement query off source curve of '" + field.segment_id() + "' by " +
                    std::to_string(best_d));
    return best_val;
}

std::map<std::pair<std::string, int>, DisplacementField>
build_segment_fields(const SegmentedGeometry& t0, const SegmentedGeometry& t1, int n_per_segment, Keying keying) {
    std::map<std::pair<std::string, int>, DisplacementField> fields;
    for (const auto& [parent, segs0] : t0.segments) {
        auto it = t1.segments.find(parent);
        if (it == t1.segments.end())
            throw Error("curve '" + parent + "' missing at the later stage");
        const auto& segs1 = it->second;
        if (segs0.size() != segs1.size())
            throw Error("curve '" + parent + "': segment count changed between stages (" +
                        std::to_string(segs0.size()) + " vs " + std::to_string(segs1.size()) + ")");
        for (std::size_t i = 0; i < segs0.size(); ++i)
            fields[{parent, int(i)}] = uniform_displacement_field(segs0[i], segs1[i], n_per_segment, keying);
    }
    return fields;
}

std::map<std::string, DisplacementField> build_whole_curve_fields(const StagedGeometry& t0, const StagedGeometry& t1,
                                                                  int n_per_curve, Keying keying) {
    std::map<std::string, DisplacementField> fields;
    for (const auto& c0 : t0.curves) {
        if (!t1.has_curve(c0.id))
            throw Error("curve '" + c0.id + "' missing at the later stage");
        fields[c0.id] = uniform_displacement_field(c0, t1.curve(c0.id), n_per_curve, keying);
    }
    return fields;
}

} // namespace growfem
