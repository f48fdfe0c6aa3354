#pragma once

#include "growfem/point.hpp"

namespace growfem {

/// Sign-exact orientation test: > 0 when a,b,c turn counterclockwise,
/// < 0 clockwise, 0 collinear. Magnitude is only approximate.
double orient2d(const Point2& a, const Point2& b, const Point2& c);

/// Sign-exact incircle test for a CCW triangle a,b,c: > 0 when d lies
/// inside the circumcircle, < 0 outside, 0 on it.
double incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d);

} // namespace growfem
