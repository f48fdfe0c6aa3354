#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "growfem/geometry.hpp"

namespace growfem {

enum class Keying { Parameter, Coordinate };

/// One sample of a displacement field. Parameter keying stores the normalized
/// arc-length parameter in key1 (key2 unused); coordinate keying stores (x,y).
struct DisplacementRow {
    double key1 = 0.0;
    double key2 = 0.0;
    double dx = 0.0;
    double dy = 0.0;
};

struct DisplacementField {
    std::string parent_id;
    int segment_index = -1; // -1 for whole-curve fields
    Keying keying = Keying::Parameter;
    bool closed = false; // closed source curve: parameter and key polyline wrap
    std::vector<DisplacementRow> rows; // ordered by parameter / traversal order

    std::string segment_id() const;
};

/// Open curve view of a segment, named parent#index.
Curve segment_as_curve(const CurveSegment& seg);

/// Pairs the n uniform resample points of the two stages; row i carries the
/// coordinate difference. Both curves must agree in open/closed flag.
DisplacementField uniform_displacement_field(const Curve& gamma_t, const Curve& gamma_t1, int n, Keying keying);
DisplacementField uniform_displacement_field(const CurveSegment& seg_t, const CurveSegment& seg_t1, int n,
                                             Keying keying);

/// Normalized arc-length parameter of a point lying on the segment (within tol).
double boundary_parameter(const CurveSegment& segment, const Point2& p, double tol = kIntersectionTol);

/// Piecewise-linear interpolation at parameter s in [0,1]; no extrapolation.
Point2 evaluate_displacement(const DisplacementField& field, double s);

/// Coordinate-keyed evaluation: projects p onto the polyline of row keys and
/// interpolates along it; p must lie within max_lateral of that polyline.
Point2 evaluate_displacement(const DisplacementField& field, const Point2& p, double max_lateral);

/// One field per curve segment, stage t to t+1, matched by (parent, index).
std::map<std::pair<std::string, int>, DisplacementField>
build_segment_fields(const SegmentedGeometry& t0, const SegmentedGeometry& t1, int n_per_segment,
                     Keying keying = Keying::Parameter);

/// One field per whole parent curve, ignoring segmentation.
std::map<std::string, DisplacementField> build_whole_curve_fields(const StagedGeometry& t0, const StagedGeometry& t1,
                                                                  int n_per_curve, Keying keying = Keying::Parameter);

void validate_field(const DisplacementField& field);

} // namespace growfem
