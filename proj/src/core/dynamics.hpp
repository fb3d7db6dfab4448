#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "table.hpp"

namespace hypb {

// Unit-speed phase point in chart coordinates.
struct PhasePoint {
    Vec2 pos;
    Vec2 vel;
};

enum class Termination { time_limit, grazing, escaped };

struct CollisionEvent {
    double t = 0.0;
    int wall = -1;
    double r = 0.0;      // arc-length parameter of the impact point
    double theta = 0.0;  // incidence angle in (0, pi/2]
    double kappa = 0.0;  // wall curvature at the impact point
    Vec2 pos;
    Vec2 v_pre;
    Vec2 v_post;
};

struct StateSample {
    double t = 0.0;
    Vec2 pos;
    Vec2 vel;
    int event_flag = 0;  // 1 on collision rows
};

struct TrajectoryRecord {
    PhasePoint initial;
    double duration = 0.0;  // requested
    double t_end = 0.0;     // reached
    Termination termination = Termination::time_limit;
    std::vector<CollisionEvent> events;
    std::vector<StateSample> samples;  // empty when sampling is disabled
    std::optional<CollisionEvent> grazing_event;  // the terminating tangential hit
    double max_penetration = 0.0;
    double max_speed_drift_rate = 0.0;  // unit-speed drift per time before renormalization
};

struct FlowParams {
    double step = 1e-3;            // RK4 step for curved metrics
    double flat_step = 0.05;       // detection stride on the exact flat path
    double grazing_tolerance = 1e-4;  // grazing when sin(theta) falls below
    double sample_stride = 0.0;    // dense-output stride; 0 disables samples
    double time_tolerance = 1e-12;    // collision bisection tolerance in time
    double penetration_limit = 1e-6;  // escape beyond this is an integrator failure
};

// Unit vector at the given chart angle; validates that pos is in the domain.
PhasePoint make_phase_point(const BilliardTable& table, Vec2 pos, double angle);
PhasePoint make_phase_point(const MetricField& metric, Vec2 pos, double angle);

// Advances the state by dt of geodesic motion (no walls), renormalizing the
// speed after every internal step. Reports the largest renormalization
// correction rate when asked.
PhasePoint geodesic_step(const MetricField& metric, const PhasePoint& state, double dt,
                         const FlowParams& params = {}, double* drift_rate = nullptr);

// Reflection law v+ = v - 2 g(v, N) N at a wall frame.
Vec2 reflect_velocity(const MetricField& metric, const WallFrame& frame, const Vec2& v);

struct NextCollision {
    enum class Kind { hit, grazing, none } kind = Kind::none;
    CollisionEvent event;  // valid for hit and grazing
    double free_time = 0.0;
};

// Earliest boundary hit strictly before t_max.
NextCollision next_collision(const BilliardTable& table, const PhasePoint& state, double t_max,
                             const FlowParams& params = {});

// Full billiard flow over [0, T].
TrajectoryRecord flow(const BilliardTable& table, const PhasePoint& state, double T,
                      const FlowParams& params = {});

// State on a recorded trajectory at time t (re-integrated from the nearest
// recorded event).
PhasePoint state_at(const BilliardTable& table, const TrajectoryRecord& record, double t,
                    const FlowParams& params = {});

// Time to first collision from one start, capped at t_cap. Exact ray marching
// on flat tables with circle walls, integration otherwise.
double free_flight_time(const BilliardTable& table, const PhasePoint& state, double t_cap,
                        const FlowParams& params = {});

struct HorizonCandidate {
    Vec2 origin;
    double angle = 0.0;
};

struct HorizonResult {
    double max_free_flight = 0.0;
    long total_samples = 0;
    long capped_count = 0;
    std::vector<HorizonCandidate> capped;  // collision-free (up to t_cap) starts
};

// Sweeps n_origins seeded-random origins x n_directions equispaced directions
// hunting for collision-free corridors.
HorizonResult horizon_probe(const BilliardTable& table, int n_directions, int n_origins,
                            double t_cap, std::uint64_t seed = 1, int jobs = 0,
                            const FlowParams& params = {});

}  // namespace hypb
