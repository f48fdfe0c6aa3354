#pragma once

#include <utility>

#include "growfem/geometry.hpp"

namespace growfem {

/// Deterministic synthetic stage pair: a half-ellipse limb-bud outline on a
/// flat base, partitioned into three subdomains by two interior arcs meeting
/// the outline at four junctions. Stage t+1 elongates the outline along the
/// major axis by (1 + 0.3*deformation_scale) and shifts the arcs distally.
/// deformation_scale must lie in (0, 2].
std::pair<StagedGeometry, StagedGeometry> generate_fixture(double deformation_scale);

} // namespace growfem
