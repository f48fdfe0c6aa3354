#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "growfem/displacement.hpp"
#include "growfem/geometry.hpp"
#include "growfem/mesh.hpp"

namespace growfem {

/// 17-significant-digit decimal, round-trip exact for double.
std::string format_double(double v);

/// Geometry CSV (curve_id,point_index,x,y) plus a JSON sidecar at the same
/// path with extension .json holding closed flags and subdomain loops.
void write_geometry(const StagedGeometry& g, const std::string& csv_path);
StagedGeometry read_geometry(const std::string& csv_path);

/// Displacement CSV: segment_id,key_type,key1,key2,dx,dy. Parameter keying
/// leaves key2 empty.
void write_displacement_csv(const std::vector<DisplacementField>& fields, const std::string& path);
std::vector<DisplacementField> read_displacement_csv(const std::string& path);

/// Segmented curves: parent_id,segment_index,point_index,x,y,start_junction,end_junction.
void write_segments_csv(const SegmentedGeometry& g, const std::string& path);

/// areas.csv rows; headers written on construction, one row per append.
class AreasWriter {
public:
    AreasWriter(const std::string& path, const std::vector<std::string>& labels);
    void append(int step, double time, const std::map<std::string, double>& areas, double total);

private:
    std::string path_;
    std::vector<std::string> labels_;
};

class QualityWriter {
public:
    explicit QualityWriter(const std::string& path);
    void append(int step, const QualityReport& report);

private:
    std::string path_;
};

/// fields_NNNN.csv: node,x,y,A,B,C,P_A,P_B,P_C.
void write_fields_csv(const Mesh& mesh, const std::array<Eigen::VectorXd, 3>& c,
                      const std::array<Eigen::VectorXd, 3>& production, const std::string& path);

/// Legacy VTK unstructured grid with per-cell label index and quality and
/// per-point species fields.
void write_vtk(const Mesh& mesh, const std::array<Eigen::VectorXd, 3>& c,
               const std::array<Eigen::VectorXd, 3>& production, const std::string& path);

} // namespace growfem
