#pragma once

#include <vector>

#include "tangent.hpp"

namespace hypb {

// Cone C_eps = {(x, y): eps*y <= x <= y/eps}, a closed subcone of the open
// positive quadrant (taken projectively, so the opposite quadrant III copy is
// the same cone).
struct ConeParams {
    double epsilon = 0.3;
    explicit ConeParams(double eps);
    ConeParams() = default;
};

bool cone_contains(double epsilon, const Vec2& v);

// True iff M maps the open quadrant cone {xy > 0} into C_eps. Checked on the
// images of the boundary rays (1,0) and (0,1) after normalizing det to +1
// (row swap) and the overall sign (multiplication by -Id); linearity and
// convexity of C_eps extend the check to the whole cone.
bool cone_map_check(const TangentMatrix& m, double epsilon);

// Gain of the quadratic form Q(x, y) = xy under M: Q(Mv)/Q(v). For matrices
// passing cone_map_check at eps this is >= 1/(1 - eps^2).
double expansion_gain(const TangentMatrix& m, const Vec2& v);

double cone_gain_bound(double epsilon);  // 1/(1 - eps^2)

// Projective angle in [0, pi).
double projective_angle(const Vec2& v);
double projective_distance(double a, double b);

struct DirectionEstimate {
    double unstable_angle = 0.0;  // projective angle of the E^u estimate
    double stable_angle = 0.0;
    double unstable_diameter = 0.0;  // angular diameter of the iterated cone
    double stable_diameter = 0.0;
    int unstable_depth = 0;  // factors actually composed
    int stable_depth = 0;
};

struct InvariantDirections {
    std::vector<DirectionEstimate> at_mesh;  // one per mesh point (n+1 entries)
    bool contracting = true;                 // false: non-contracting warning
    std::vector<double> forward_diameters;   // deepest forward chain
    std::vector<double> backward_diameters;  // deepest backward chain
};

// Finite truncation of the nested cone-image intersections: forward products
// approximate E^u, backward inverse products approximate E^s.
InvariantDirections invariant_directions(const std::vector<TangentMatrix>& cocycle,
                                         int iterations);

}  // namespace hypb
