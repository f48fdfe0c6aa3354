#include "growfem/predicates.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>

namespace growfem {

namespace {

using Rational = boost::multiprecision::cpp_rational;

// Static filter thresholds; fall through to exact rational arithmetic when
// the double result is too close to zero to trust its sign.
constexpr double kOrientFilter = 3.3306690738754716e-16;
constexpr double kIncircleFilter = 1.0e-14;

double sign_of(const Rational& r) {
    const int s = r.sign();
    return s > 0 ? 1.0 : (s < 0 ? -1.0 : 0.0);
}

} // namespace

double orient2d(const Point2& a, const Point2& b, const Point2& c) {
    const double detl = (b.x - a.x) * (c.y - a.y);
    const double detr = (b.y - a.y) * (c.x - a.x);
    const double det = detl - detr;
    const double mag = std::abs(detl) + std::abs(detr);
    if (std::abs(det) > kOrientFilter * mag)
        return det;
    if (mag == 0.0)
        return 0.0;
    const Rational ax(a.x), ay(a.y), bx(b.x), by(b.y), cx(c.x), cy(c.y);
    return sign_of((bx - ax) * (cy - ay) - (by - ay) * (cx - ax)) * (kOrientFilter * mag + 1e-300);
}

double incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double alift = adx * adx + ady * ady;
    const double blift = bdx * bdx + bdy * bdy;
    const double clift = cdx * cdx + cdy * cdy;
    const double bcdet = bdx * cdy - cdx * bdy;
    const double cadet = cdx * ady - adx * cdy;
    const double abdet = adx * bdy - bdx * ady;
    const double det = alift * bcdet + blift * cadet + clift * abdet;
    const double perm = alift * (std::abs(bdx * cdy) + std::abs(cdx * bdy)) +
                        blift * (std::abs(cdx * ady) + std::abs(adx * cdy)) +
                        clift * (std::abs(adx * bdy) + std::abs(bdx * ady));
    if (std::abs(det) > kIncircleFilter * perm)
        return det;
    if (perm == 0.0)
        return 0.0;
    const Rational ax(a.x), ay(a.y), bx(b.x), by(b.y), cx(c.x), cy(c.y), dx(d.x), dy(d.y);
    const Rational radx = ax - dx, rady = ay - dy;
    const Rational rbdx = bx - dx, rbdy = by - dy;
    const Rational rcdx = cx - dx, rcdy = cy - dy;
    const Rational r = (radx * radx + rady * rady) * (rbdx * rcdy - rcdx * rbdy) +
                       (rbdx * rbdx + rbdy * rbdy) * (rcdx * rady - radx * rcdy) +
                       (rcdx * rcdx + rcdy * rcdy) * (radx * rbdy - rbdx * rady);
    return sign_of(r) * (kIncircleFilter * perm + 1e-300);
}

} // namespace growfem
