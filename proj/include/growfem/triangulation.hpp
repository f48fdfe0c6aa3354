#pragma once

#include <array>
#include <vector>

#include "growfem/point.hpp"

namespace growfem {

/// Constrained edge between input vertices, tagged with its source and the
/// parameter range it covers there. Splits preserve the tag and bisect the
/// parameter range.
struct ConstraintEdge {
    int a = -1, b = -1;
    int marker = -1;
    double s0 = 0.0, s1 = 0.0;
};

struct TriangulationInput {
    std::vector<Point2> points;
    std::vector<ConstraintEdge> constraints;
};

struct TriangulationResult {
    std::vector<Point2> points; // input points first, Steiner points appended
    std::vector<std::array<int, 3>> triangles; // counterclockwise
    std::vector<ConstraintEdge> constraints;   // post-split subsegments
};

/// Globally Delaunay triangulation conforming to all constraints: constraint
/// subsegments are kept Gabriel (empty diametral disks) by midpoint splits,
/// then Ruppert-style refinement drives interior triangles toward min_angle
/// and max_area. Only triangles whose centroid passes keep_centroid are
/// refined or kept; the rest (outside the domain) are dropped.
TriangulationResult conforming_delaunay(const TriangulationInput& input, double max_area, double min_angle_deg,
                                        const std::vector<Point2>& outer_polygon);

} // namespace growfem
