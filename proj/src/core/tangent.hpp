#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "dynamics.hpp"

namespace hypb {

// Orthogonal Jacobi data (y, ydot) along a trajectory. Between collisions y
// obeys y'' = -K(t) y; at a collision it jumps by the collision map below.
struct JacobiFrame {
    double y = 0.0;
    double ydot = 0.0;
    double t = 0.0;
};

// 2x2 transport matrix on (y, ydot) coordinates over [t_start, t_end].
// Liouville: det = +-1 (flights have det 1, collision maps det 1 exactly).
struct TangentMatrix {
    double a = 1.0, b = 0.0;
    double c = 0.0, d = 1.0;
    double t_start = 0.0;
    double t_end = 0.0;

    double det() const { return a * d - b * c; }

    JacobiFrame apply(const JacobiFrame& f) const {
        return {a * f.y + b * f.ydot, c * f.y + d * f.ydot, t_end};
    }

    // Composition: (m2 * m1) maps like m1 followed by m2.
    friend TangentMatrix operator*(const TangentMatrix& m2, const TangentMatrix& m1) {
        TangentMatrix r;
        r.a = m2.a * m1.a + m2.b * m1.c;
        r.b = m2.a * m1.b + m2.b * m1.d;
        r.c = m2.c * m1.a + m2.d * m1.c;
        r.d = m2.c * m1.b + m2.d * m1.d;
        r.t_start = m1.t_start;
        r.t_end = m2.t_end;
        return r;
    }
};

struct TangentOptions {
    double step = 1e-3;
    // Test-harness override: use this constant curvature in the Jacobi
    // equation instead of the metric's K along the trajectory. Gives every
    // ODE path a closed-form oracle.
    std::optional<double> constant_curvature;
    double blowup_exclusion_window = 1e-3;
    // Extra emission stride on the exact flat path, where flights otherwise
    // produce samples only at their endpoints. 0 keeps endpoints only.
    double sample_stride = 0.0;
};

// A collision-free piece of trajectory, identified by its start state.
struct FlightSegment {
    PhasePoint start;
    double t0 = 0.0;
    double duration = 0.0;
};

struct FlightResult {
    JacobiFrame frame;
    TangentMatrix matrix;
};

// Integrates y'' = -K(gamma(t)) y along the segment; returns the evolved
// frame and the fundamental solution matrix. Exact on flat metrics without a
// curvature override.
FlightResult jacobi_flight(const MetricField& metric, const FlightSegment& segment,
                           const JacobiFrame& frame, const TangentOptions& opts = {});

// Collision map: y+ = -y-, ydot+ = -ydot- + (2 kappa / sin theta) y-.
// The matrix has determinant exactly 1.
TangentMatrix jacobi_collision_matrix(const CollisionEvent& event);
FlightResult jacobi_collision(const JacobiFrame& frame, const CollisionEvent& event);

// Riccati jump at a collision: u+ = u- - 2 kappa / sin theta.
double riccati_collision(double u_minus, const CollisionEvent& event);

struct RiccatiSample {
    double t = 0.0;
    double y = 0.0;
    double ydot = 0.0;
    double ydd = 0.0;  // -K y at the sample, for Hermite interpolation
    double u = 0.0;    // ydot / y, meaningless when !defined
    bool defined = true;
    bool collision = false;
};

struct RiccatiTrace {
    std::vector<RiccatiSample> samples;
    std::vector<double> blowup_times;
    double exclusion_window = 1e-3;

    double terminal_u() const { return samples.empty() ? 0.0 : samples.back().u; }
};

// Riccati solution u with u(t0) = u0 along a collision-free segment,
// propagated through the linear (y, ydot) system so that blow-ups appear as
// transversal zeros of y located by sign change (never as ODE divergence).
RiccatiTrace riccati_flight(const MetricField& metric, const FlightSegment& segment, double u0,
                            const TangentOptions& opts = {});

// Riccati solution along a recorded trajectory (collision jumps applied),
// starting from u(t_a^+) = u0. Samples are recorded at integration steps and
// at collisions (post-jump values).
RiccatiTrace riccati_along(const BilliardTable& table, const TrajectoryRecord& record, double t_a,
                           double t_b, double u0, const TangentOptions& opts = {});

// Frame propagation along a recorded trajectory with a mutable-frame callback
// (kind: 0 = integration step, 1 = post-collision, 2 = requested time).
using FrameVisitor = std::function<void(double t, JacobiFrame& frame, int kind)>;
JacobiFrame propagate_jacobi(const BilliardTable& table, const TrajectoryRecord& record,
                             double t_a, double t_b, JacobiFrame frame,
                             const TangentOptions& opts = {}, const FrameVisitor* visitor = nullptr,
                             const std::vector<double>* requested_times = nullptr);

// Transport matrix over [t_a, t_b] of a recorded trajectory (flights composed
// with collision maps).
TangentMatrix interval_matrix(const BilliardTable& table, const TrajectoryRecord& record,
                              double t_a, double t_b, const TangentOptions& opts = {});

// Composes flight and collision matrices between consecutive mesh times.
// Fails if a mesh time lies within 1e-9 of a collision time.
std::vector<TangentMatrix> cocycle(const BilliardTable& table, const TrajectoryRecord& record,
                                   const std::vector<double>& mesh,
                                   const TangentOptions& opts = {});

// Max relative deviation of the u representations of two traces over the
// same segment, skipping blow-up exclusion windows of either trace.
double riccati_consistency_check(const RiccatiTrace& frame_trace, const RiccatiTrace& u_trace);

// Upper bound for Riccati solutions after a collision-free window of length
// eta: alpha = sqrt(Kmax) (1 + e^{-2 sqrt(Kmax) eta}) / (1 - e^{-2 sqrt(Kmax) eta}),
// with the flat-limit value 1/eta at Kmax = 0.
double alpha_bound(double k_max, double eta);

}  // namespace hypb
