#pragma once

#include <map>
#include <string>
#include <vector>

#include "growfem/point.hpp"

namespace growfem {

/// Default tolerance for merging/snapping intersection points, in
/// nondimensional length units.
inline constexpr double kIntersectionTol = 1e-9;

/// Ordered polyline with identity and orientation. Closed curves do not
/// repeat the first point; closure is implicit.
struct Curve {
    std::string id;
    std::vector<Point2> points;
    bool closed = false;
};

/// Validates the Curve invariants (>= 2 points, finite, consecutive points
/// distinct, closed curves do not store the closing point). Throws Error.
void validate_curve(const Curve& c);

/// Cumulative arc length at each vertex; front() == 0, back() == total
/// open length. For closed curves an extra entry for the closing edge is
/// appended, so size() == points.size() + 1.
std::vector<double> cumulative_lengths(const Curve& c);

/// Total arc length (including the closing edge for closed curves).
double curve_length(const Curve& c);

/// Point at normalized arc-length parameter s in [0,1] along the polyline.
Point2 point_at(const Curve& c, double s);

/// One piece of a subdomain loop: the part of curve `curve_id` between
/// normalized arc-length parameters s0 and s1, traversed forward
/// (orientation +1, requires s0 < s1 semantics on [0,1]) or backward
/// (orientation -1). Whole-curve pieces use s0=0, s1=1.
struct LoopPiece {
    std::string curve_id;
    int orientation = 1;
    double s0 = 0.0;
    double s1 = 1.0;
};

/// Staged boundary curves plus the subdomain decomposition at one stage.
struct StagedGeometry {
    int stage_time = 0;
    std::vector<Curve> curves;
    std::map<std::string, std::vector<LoopPiece>> subdomains;

    const Curve& curve(const std::string& id) const;
    bool has_curve(const std::string& id) const;
};

/// A contiguous piece of a parent curve produced by splitting at
/// intersection points. Segments of one parent share endpoint vertices and
/// concatenate to the parent's vertex sequence.
struct CurveSegment {
    std::string parent_id;
    int segment_index = 0;
    std::vector<Point2> points;
    bool start_is_junction = false;
    bool end_is_junction = false;
    /// Parent-curve parameter range covered by this segment.
    double parent_s0 = 0.0;
    double parent_s1 = 1.0;
};

double segment_length(const CurveSegment& seg);

/// An intersection between two curves: the point and the normalized
/// arc-length parameters on each curve.
struct Intersection {
    Point2 point;
    double param_a = 0.0;
    double param_b = 0.0;
};

/// One merged intersection point of the whole geometry with all curve
/// incidences. `interior` is true when the point is interior to at least
/// one curve (it actually splits something); endpoint-only contacts such as
/// loop corners are recorded with interior == false.
struct JunctionRecord {
    Point2 point;
    std::vector<std::pair<std::string, double>> incidences; // (curve_id, param)
    bool interior = false;
};

/// Result of segment_at_intersections: every curve replaced by its ordered
/// segment list, plus the merged intersection records.
struct SegmentedGeometry {
    int stage_time = 0;
    StagedGeometry source;
    std::map<std::string, std::vector<CurveSegment>> segments;
    std::vector<JunctionRecord> junctions;

    const CurveSegment& segment(const std::string& parent, int index) const;
    int interior_junction_count() const;
};

/// Resamples a curve to exactly n points with equal arc-length spacing
/// along the input polyline. Open curves keep their exact end points;
/// closed curves keep the start point and space points total_length/n
/// apart. Throws Error for n < 2 or zero-length input.
Curve resample_uniform(const Curve& curve, int n);

/// All points where the two polylines pass within tol of each other,
/// contiguous near-contact runs merged to one representative point.
/// Results are sorted by param_a.
std::vector<Intersection> find_intersections(const Curve& a, const Curve& b, double tol);

/// Splits every curve of the geometry at each pairwise intersection point
/// so intersection points become segment endpoints. Intersections closer
/// than tol are merged; vertices within tol of a merged intersection are
/// snapped onto it. Grazing contact that cannot be resolved into a single
/// split point raises an Error with a diagnostic.
SegmentedGeometry segment_at_intersections(const StagedGeometry& geometry, double tol = kIntersectionTol);

/// Absolute shoelace area of an implicitly closed loop (>= 3 points).
double polygon_area(const std::vector<Point2>& loop);

/// As polygon_area, but appends a warning to `warnings` if the loop
/// self-intersects (the signed-formula area is still returned).
double polygon_area_checked(const std::vector<Point2>& loop, std::vector<std::string>& warnings);

/// Concatenated polyline of a subdomain loop (consecutive duplicate join
/// points dropped). Throws if the pieces do not chain into a closed loop
/// within tol.
std::vector<Point2> subdomain_loop_polygon(const StagedGeometry& g, const std::string& subdomain_id,
                                           double tol = 1e-7);

/// Outer boundary polygon: the parts of curves used by exactly one
/// subdomain loop, chained into a single closed loop.
std::vector<Point2> outer_boundary_polygon(const StagedGeometry& g, double tol = 1e-7);

/// Checks loop closure and that subdomain areas sum to the outer boundary
/// area within rel_tol. Throws Error on violation.
void validate_staged_geometry(const StagedGeometry& g, double rel_tol = 1e-6);

/// Crossing-number point-in-polygon test (implicitly closed loop).
bool point_in_polygon(const Point2& p, const std::vector<Point2>& loop);

} // namespace growfem
