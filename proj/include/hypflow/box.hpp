#pragma once

// Analysis box D = (0,d1) x (0,d2), enlarged box Dhat = (0,d1+d3) x (0,d2)
// with the ordering 0 < d1 < d2 < d1+d3, Dhat inside [0,1]^2, and the Holder
// exponent alpha in (0, 1/4).  d(x) is the distance to the top of the box,
// d1(x) the distance to the coordinate axes.

#include <algorithm>
#include <cmath>

#include "hypflow/errors.hpp"
#include "hypflow/grid.hpp"

namespace hypflow {

struct BoxGeometry {
    double delta1 = 0.0;
    double delta2 = 0.0;
    double delta3 = 0.0;
    double alpha = 0.2;

    void validate() const {
        if (!(0.0 < delta1 && delta1 < delta2 && delta2 < delta1 + delta3))
            throw InvalidArgument("BoxGeometry: need 0 < delta1 < delta2 < delta1 + delta3");
        if (!(delta1 + delta3 <= 1.0 && delta2 <= 1.0))
            throw InvalidArgument("BoxGeometry: Dhat must lie inside [0,1]^2");
        if (!(alpha > 0.0 && alpha < 0.25))
            throw InvalidArgument("BoxGeometry: alpha must lie strictly in (0, 1/4)");
    }

    bool in_D(Vec2 p) const {
        return p.x > 0.0 && p.x < delta1 && p.y > 0.0 && p.y < delta2;
    }
    bool in_D_closure(Vec2 p) const {
        return p.x >= 0.0 && p.x <= delta1 && p.y >= 0.0 && p.y <= delta2;
    }
    bool in_Dhat_closure(Vec2 p) const {
        return p.x >= 0.0 && p.x <= delta1 + delta3 && p.y >= 0.0 && p.y <= delta2;
    }
    bool in_feeding_zone(Vec2 p) const {
        return p.x >= delta1 && p.x < delta1 + delta3 && p.y > 0.0 && p.y < delta2;
    }

    double top_distance(Vec2 p) const { return delta2 - p.y; }        // d(x)
    double axis_distance(Vec2 p) const { return std::min(p.x, p.y); } // d1(x)
};

// Fixed concretization of the trajectory distance profile: linear up to
// s* = 1 then constant, phi(s) = (1 - 1/e) * min(s, 1); satisfies
// phi(s) <= 1 - e^{-s} by concavity.
inline double phi_profile(double s) {
    return (1.0 - std::exp(-1.0)) * std::min(std::max(s, 0.0), 1.0);
}

} // namespace hypflow
