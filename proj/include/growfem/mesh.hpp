#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "growfem/displacement.hpp"
#include "growfem/geometry.hpp"

namespace growfem {

/// A mesh edge lying on a curve segment. s0/s1 are parameters of the PARENT
/// curve, linear within each straight polyline edge of the segment.
struct BoundaryEdgeTag {
    int n0 = -1, n1 = -1;
    std::string parent_id;
    int segment_index = -1;
    double s0 = 0.0, s1 = 0.0;
};

struct Mesh {
    std::vector<Point2> nodes;          // current positions
    std::vector<Point2> creation_nodes; // positions at triangulation time
    std::vector<std::array<int, 3>> triangles; // counterclockwise at creation
    std::vector<std::string> element_labels;   // subdomain per triangle
    std::vector<BoundaryEdgeTag> boundary_tags;
    std::vector<int> junction_nodes; // nodes placed exactly on intersection points

    std::vector<Point2> node_displacement() const; // nodes - creation_nodes
};

struct QualityReport {
    std::vector<double> per_element_quality;
    double min_quality = 1.0;
    int inverted_count = 0;
};

/// Stage-end displacement fields for every constrained curve, in one of the
/// two modes: per-segment fields, or whole-parent-curve fields that ignore
/// the segmentation.
struct StageFields {
    std::map<std::pair<std::string, int>, DisplacementField> segment_fields;
    std::map<std::string, DisplacementField> curve_fields;
    bool whole_curve = false;
};

/// Conforming triangulation of the segmented geometry: every segment polyline
/// is covered by mesh edges, triangles labeled by the subdomain containing
/// their centroid. target_edge_length <= 0 picks bbox_diagonal / 30.
Mesh triangulate(const SegmentedGeometry& geometry, double target_edge_length = 0.0);

/// 4*sqrt(3)*signed_area / (l1^2+l2^2+l3^2) relative to creation orientation;
/// 1 for equilateral, negative for inverted, 0 for degenerate.
double element_quality(const Mesh& mesh, int element);

QualityReport quality_report(const Mesh& mesh);

/// Nodes constrained during mesh motion: all nodes referenced by boundary
/// tags (outer boundary and internal segment curves alike).
std::vector<int> constrained_node_set(const Mesh& mesh);

/// Displaces constrained nodes by fraction * field value at their boundary
/// parameter and places free nodes by componentwise discrete-harmonic
/// extension of the full stage displacement from the creation mesh; labels
/// and connectivity are untouched. max_principle_violation, when given,
/// receives the worst per-component overshoot of free nodes beyond the
/// constrained displacement range.
Mesh move_mesh(const Mesh& mesh, const StageFields& fields, double fraction,
               double* max_principle_violation = nullptr);

/// Sum of absolute element areas per subdomain label at current positions.
std::map<std::string, double> labeled_areas(const Mesh& mesh);

} // namespace growfem
