#include "dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace hypb {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct DerivState {
    Vec2 dpos;
    Vec2 dvel;
};

DerivState ode_rhs(const MetricField& metric, const Vec2& pos, const Vec2& vel) {
    return {vel, metric.geodesic_accel(pos, vel)};
}

// One classical RK4 step; does not renormalize.
void rk4_step(const MetricField& metric, Vec2& pos, Vec2& vel, double h) {
    DerivState k1 = ode_rhs(metric, pos, vel);
    DerivState k2 = ode_rhs(metric, pos + 0.5 * h * k1.dpos, vel + 0.5 * h * k1.dvel);
    DerivState k3 = ode_rhs(metric, pos + 0.5 * h * k2.dpos, vel + 0.5 * h * k2.dvel);
    DerivState k4 = ode_rhs(metric, pos + h * k3.dpos, vel + h * k3.dvel);
    pos += (h / 6.0) * (k1.dpos + 2.0 * k2.dpos + 2.0 * k3.dpos + k4.dpos);
    vel += (h / 6.0) * (k1.dvel + 2.0 * k2.dvel + 2.0 * k3.dvel + k4.dvel);
}

double flat_detection_step(const BilliardTable& table, const FlowParams& params) {
    double min_period = std::min(table.metric().period_x(), table.metric().period_y());
    double cap = 0.24 * min_period;  // keep segments inside the copy margin
    double h = params.flat_step > 0.0 ? params.flat_step : 0.2 * min_period;
    return std::min(h, cap);
}

bool all_circle_walls(const BilliardTable& table) {
    for (std::size_t w = 0; w < table.wall_count(); ++w)
        if (!table.wall(w).is_circle()) return false;
    return true;
}

}  // namespace

PhasePoint make_phase_point(const MetricField& metric, Vec2 pos, double angle) {
    Vec2 dir{std::cos(angle), std::sin(angle)};
    PhasePoint s;
    s.pos = metric.wrap(pos);
    s.vel = metric.unit(s.pos, dir);
    return s;
}

PhasePoint make_phase_point(const BilliardTable& table, Vec2 pos, double angle) {
    PhasePoint s = make_phase_point(table.metric(), pos, angle);
    if (table.signed_distance(s.pos) < -1e-9)
        fail(ErrorCode::domain, "phase point lies inside an obstacle");
    return s;
}

PhasePoint geodesic_step(const MetricField& metric, const PhasePoint& state, double dt,
                         const FlowParams& params, double* drift_rate) {
    if (!(dt > 0.0)) fail(ErrorCode::invalid_argument, "geodesic_step requires dt > 0");
    if (dt < 1e-12) fail(ErrorCode::invalid_argument, "geodesic_step: step-size underflow");
    PhasePoint s = state;
    if (drift_rate) *drift_rate = 0.0;
    if (metric.is_flat()) {
        s.pos = metric.wrap(s.pos + dt * s.vel);
        return s;
    }
    double remaining = dt;
    while (remaining > 1e-15 * dt) {
        double h = std::min(params.step, remaining);
        rk4_step(metric, s.pos, s.vel, h);
        double speed = metric.speed(s.pos, s.vel);
        // Short landing steps would divide the renormalization residual by a
        // tiny h; only full steps measure integrator quality.
        if (drift_rate && h >= 0.5 * params.step)
            *drift_rate = std::max(*drift_rate, std::abs(speed - 1.0) / h);
        s.vel = s.vel * (1.0 / speed);
        s.pos = metric.wrap(s.pos);
        remaining -= h;
    }
    return s;
}

Vec2 reflect_velocity(const MetricField& metric, const WallFrame& frame, const Vec2& v) {
    double vn = metric.inner(frame.point, v, frame.normal);
    return v - 2.0 * vn * frame.normal;
}

namespace {

// ---------------------------------------------------------------------------
// Flow engine. Two detection paths share the event handling:
//  - flat metric with circle walls only: exact straight-line advance; hits
//    are bracketed by the segment-circle quadratic (which also catches
//    shallow tangential dips a pointwise scan would step over) and refined
//    by bisection on the same signed proxy;
//  - generic: fixed-step RK4, sign-change bracketing of the wall proxy
//    sampled every step, bisection via sub-steps from the step start.

class FlowEngine {
public:
    FlowEngine(const BilliardTable& table, const FlowParams& params)
        : table_(table), metric_(table.metric()), p_(params) {
        exact_ = metric_.is_flat() && all_circle_walls(table_);
        if (exact_) {
            seg_cap_ = flat_detection_step(table_, p_);
            for (std::size_t w = 0; w < table_.wall_count(); ++w) {
                const auto& cw = static_cast<const CircleWall&>(table_.wall(w));
                for (const Vec2& o : table_.wall_offsets(w)) {
                    CircleCopy cc;
                    cc.wall = static_cast<int>(w);
                    cc.center = cw.center() + o;
                    cc.offset = o;
                    cc.r2 = cw.radius() * cw.radius();
                    cc.reach2 = 2.0 * cw.radius() * seg_cap_ + seg_cap_ * seg_cap_;
                    cc.escape = -2.0 * cw.radius() * p_.penetration_limit;
                    copies_.push_back(cc);
                }
            }
        }
    }

    TrajectoryRecord run(const PhasePoint& start, double T, bool stop_after_first_event) {
        if (!(T > 0.0)) fail(ErrorCode::invalid_argument, "flow duration must be positive");
        if (table_.signed_distance(start.pos) < -1e-9)
            fail(ErrorCode::domain, "flow start lies inside an obstacle");
        TrajectoryRecord rec;
        rec.initial = start;
        rec.duration = T;
        if (exact_)
            run_exact(start, T, stop_after_first_event, rec);
        else
            run_generic(start, T, stop_after_first_event, rec);
        if (rec.termination == Termination::time_limit && p_.sample_stride > 0.0) {
            if (rec.samples.empty() || rec.samples.back().t < rec.t_end - 1e-12) {
                PhasePoint last = state_at_end(rec);
                push_sample(rec, rec.t_end, last.pos, last.vel, 0);
            }
        }
        return rec;
    }

private:
    struct CircleCopy {
        int wall;
        Vec2 center;
        Vec2 offset;
        double r2;
        double reach2;  // proxy threshold below which a hit within one segment is possible
        double escape;  // proxy value corresponding to the penetration limit
    };

    const BilliardTable& table_;
    const MetricField& metric_;
    FlowParams p_;
    bool exact_ = false;
    double seg_cap_ = 0.0;
    std::vector<CircleCopy> copies_;

    void push_sample(TrajectoryRecord& rec, double t, const Vec2& pos, const Vec2& vel,
                     int flag) const {
        if (p_.sample_stride <= 0.0) return;
        rec.samples.push_back({t, pos, vel, flag});
        double pen = -table_.signed_distance(pos);
        if (pen > rec.max_penetration) rec.max_penetration = pen;
    }

    PhasePoint state_at_end(const TrajectoryRecord& rec) const {
        PhasePoint base = rec.initial;
        double t0 = 0.0;
        if (!rec.events.empty()) {
            base = {rec.events.back().pos, rec.events.back().v_post};
            t0 = rec.events.back().t;
        }
        double dt = rec.t_end - t0;
        if (dt <= 0.0) return base;
        return geodesic_step(metric_, base, dt, p_);
    }

    // --- exact flat path -----------------------------------------------------

    void run_exact(const PhasePoint& start, double T, bool stop_first, TrajectoryRecord& rec) {
        Vec2 pos = start.pos;
        Vec2 vel = start.vel;
        double t = 0.0;
        push_sample(rec, 0.0, pos, vel, 0);
        double stride = p_.sample_stride;
        double next_sample = stride > 0.0 ? stride : 2.0 * T;

        while (t < T - 1e-15 * T) {
            if (stride > 0.0)
                while (next_sample <= t + 1e-15) next_sample += stride;
            double seg = std::min(seg_cap_, T - t);
            if (stride > 0.0 && next_sample - t < seg) seg = next_sample - t;

            double best_s = seg + 1.0;
            const CircleCopy* best = nullptr;
            for (const CircleCopy& cc : copies_) {
                Vec2 d = pos - cc.center;
                double c0 = dot(d, d) - cc.r2;
                if (c0 > cc.reach2) continue;
                if (c0 < cc.escape) {
                    rec.termination = Termination::escaped;
                    rec.t_end = t;
                    return;
                }
                double b = dot(d, vel);
                double disc = b * b - c0;
                if (disc <= 0.0) continue;
                double sq = std::sqrt(disc);
                double s1 = -b - sq;
                if (s1 > 1e-12 && s1 <= seg && s1 < best_s) {
                    best_s = s1;
                    best = &cc;
                }
            }

            if (best) {
                // Bisection refinement on the signed proxy along the segment.
                Vec2 d = pos - best->center;
                double c0 = dot(d, d) - best->r2;
                double b = dot(d, vel);
                auto f = [&](double s) { return c0 + 2.0 * b * s + s * s; };
                double sq = std::sqrt(std::max(b * b - c0, 0.0));
                double s2 = -b + sq;
                double pad = std::max(1e-9, 1e-9 * best_s);
                double lo = std::max(0.0, best_s - pad);
                double hi = std::min(0.5 * (best_s + s2), seg);
                if (!(f(lo) > 0.0)) lo = 0.0;
                if (!(f(hi) <= 0.0)) hi = std::min(best_s + pad, seg);
                while (hi - lo > p_.time_tolerance) {
                    double mid = 0.5 * (lo + hi);
                    if (f(mid) > 0.0)
                        lo = mid;
                    else
                        hi = mid;
                }
                double s_hit = 0.5 * (lo + hi);
                double te = t + s_hit;
                Vec2 hit = pos + s_hit * vel;
                Vec2 v_post;
                if (handle_event(rec, te, hit, vel, best->wall, best->offset, stop_first,
                                 &v_post))
                    return;
                t = te;
                pos = metric_.wrap(hit);
                vel = v_post;
                continue;
            }

            pos = metric_.wrap(pos + seg * vel);
            t += seg;
            if (stride > 0.0 && t >= next_sample - 1e-15) {
                push_sample(rec, t, pos, vel, 0);
                next_sample += stride;
            }
        }
        rec.t_end = T;
        rec.termination = Termination::time_limit;
    }

    // --- generic path ---------------------------------------------------------

    void run_generic(const PhasePoint& start, double T, bool stop_first, TrajectoryRecord& rec) {
        Vec2 pos = start.pos;
        Vec2 vel = start.vel;
        double t = 0.0;
        std::size_t nw = table_.wall_count();
        std::vector<double> prev(nw);
        std::vector<char> armed(nw);
        for (std::size_t w = 0; w < nw; ++w) {
            prev[w] = table_.wall_proxy(w, pos);
            armed[w] = prev[w] > 0.0;
        }
        double stride = p_.sample_stride;
        double next_sample = stride > 0.0 ? stride : 2.0 * T;
        push_sample(rec, 0.0, pos, vel, 0);

        while (t < T - 1e-15 * T) {
            if (stride > 0.0)
                while (next_sample <= t + 1e-15) next_sample += stride;
            double h = std::min(p_.step, T - t);
            if (stride > 0.0 && next_sample - t < h) h = next_sample - t;

            Vec2 pos0 = pos, vel0 = vel;
            rk4_step(metric_, pos, vel, h);
            double speed = metric_.speed(pos, vel);
            if (h >= 0.5 * p_.step)
                rec.max_speed_drift_rate =
                    std::max(rec.max_speed_drift_rate, std::abs(speed - 1.0) / h);
            vel = vel * (1.0 / speed);
            Vec2 wrapped = metric_.wrap(pos);

            double best_s = h + 1.0;
            std::size_t best_w = nw;
            for (std::size_t w = 0; w < nw; ++w) {
                double val = table_.wall_proxy(w, wrapped);
                if (armed[w] && val <= 0.0) {
                    double s = bisect_crossing(w, pos0, vel0, h);
                    if (s < best_s) {
                        best_s = s;
                        best_w = w;
                    }
                }
                if (val > 0.0) armed[w] = 1;
                prev[w] = val;
            }

            if (best_w < nw) {
                PhasePoint hit_state = substep(pos0, vel0, best_s);
                double te = t + best_s;
                Vec2 hit_wrapped = metric_.wrap(hit_state.pos);
                Vec2 offset{0.0, 0.0};
                table_.wall_proxy(best_w, hit_wrapped, &offset);
                Vec2 v_post;
                if (handle_event(rec, te, hit_wrapped, hit_state.vel, static_cast<int>(best_w),
                                 offset, stop_first, &v_post))
                    return;
                t = te;
                pos = hit_wrapped;
                vel = v_post;
                for (std::size_t w = 0; w < nw; ++w) prev[w] = table_.wall_proxy(w, pos);
                armed[best_w] = 0;  // re-arms once the proxy turns positive
                continue;
            }

            // Negative proxy without a detected crossing: penetration check.
            for (std::size_t w = 0; w < nw; ++w) {
                if (prev[w] <= 0.0 && !armed[w]) {
                    double d = table_.wall_signed_distance(w, wrapped);
                    if (d < -p_.penetration_limit) {
                        rec.termination = Termination::escaped;
                        rec.t_end = t + h;
                        return;
                    }
                }
            }

            pos = wrapped;
            t += h;
            if (stride > 0.0 && t >= next_sample - 1e-15) {
                push_sample(rec, t, pos, vel, 0);
                next_sample += stride;
            }
        }
        rec.t_end = T;
        rec.termination = Termination::time_limit;
    }

    PhasePoint substep(const Vec2& pos0, const Vec2& vel0, double s) const {
        PhasePoint q{pos0, vel0};
        if (s <= 0.0) return q;
        rk4_step(metric_, q.pos, q.vel, s);
        double speed = metric_.speed(q.pos, q.vel);
        q.vel = q.vel * (1.0 / speed);
        return q;
    }

    double bisect_crossing(std::size_t w, const Vec2& pos0, const Vec2& vel0, double h) const {
        auto f = [&](double s) {
            PhasePoint q = substep(pos0, vel0, s);
            return table_.wall_proxy(w, metric_.wrap(q.pos));
        };
        double lo = 0.0, hi = h;
        while (hi - lo > p_.time_tolerance) {
            double mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }

    // Shared collision handling. `pos_hit` may stick out of the fundamental
    // domain by less than one detection segment; `offset` identifies the hit
    // periodic copy. Returns true when the run should stop; otherwise fills
    // v_post.
    bool handle_event(TrajectoryRecord& rec, double te, const Vec2& pos_hit, const Vec2& v_pre,
                      int wall, const Vec2& offset, bool stop_first, Vec2* v_post_out) {
        const Wall& w = table_.wall(wall);
        double r = w.project(pos_hit - offset);
        WallFrame frame = w.frame(r);
        frame.point = frame.point + offset;
        double vn = metric_.inner(frame.point, v_pre, frame.normal);
        double sin_theta = std::min(std::abs(vn), 1.0);

        CollisionEvent ev;
        ev.t = te;
        ev.wall = wall;
        ev.r = r;
        ev.theta = std::asin(sin_theta);
        ev.kappa = frame.kappa;
        ev.pos = metric_.wrap(pos_hit);
        ev.v_pre = v_pre;

        if (sin_theta < p_.grazing_tolerance) {
            ev.v_post = v_pre;
            rec.grazing_event = ev;
            rec.termination = Termination::grazing;
            rec.t_end = te;
            return true;
        }

        Vec2 v_post = v_pre - 2.0 * vn * frame.normal;
        v_post = v_post * (1.0 / metric_.speed(frame.point, v_post));
        ev.v_post = v_post;
        rec.events.push_back(ev);
        push_sample(rec, te, ev.pos, v_post, 1);
        *v_post_out = v_post;
        if (stop_first) {
            rec.t_end = te;
            rec.termination = Termination::time_limit;
            return true;
        }
        return false;
    }
};

}  // namespace

TrajectoryRecord flow(const BilliardTable& table, const PhasePoint& state, double T,
                      const FlowParams& params) {
    FlowEngine engine(table, params);
    return engine.run(state, T, false);
}

NextCollision next_collision(const BilliardTable& table, const PhasePoint& state, double t_max,
                             const FlowParams& params) {
    FlowEngine engine(table, params);
    TrajectoryRecord rec = engine.run(state, t_max, true);
    NextCollision out;
    if (rec.termination == Termination::grazing) {
        out.kind = NextCollision::Kind::grazing;
        out.event = *rec.grazing_event;
        out.free_time = rec.t_end;
    } else if (!rec.events.empty()) {
        out.kind = NextCollision::Kind::hit;
        out.event = rec.events.front();
        out.free_time = rec.events.front().t;
    } else {
        out.kind = NextCollision::Kind::none;
        out.free_time = t_max;
    }
    return out;
}

PhasePoint state_at(const BilliardTable& table, const TrajectoryRecord& record, double t,
                    const FlowParams& params) {
    if (t < 0.0 || t > record.t_end * (1.0 + 1e-12) + 1e-12)
        fail(ErrorCode::invalid_argument, "state_at: time outside the trajectory range");
    PhasePoint base = record.initial;
    double t0 = 0.0;
    for (const CollisionEvent& ev : record.events) {
        if (ev.t <= t) {
            base = {ev.pos, ev.v_post};
            t0 = ev.t;
        } else {
            break;
        }
    }
    double dt = t - t0;
    if (dt <= 1e-15) return base;
    return geodesic_step(table.metric(), base, dt, params);
}

double free_flight_time(const BilliardTable& table, const PhasePoint& state, double t_cap,
                        const FlowParams& params) {
    if (!(t_cap > 0.0)) fail(ErrorCode::invalid_argument, "t_cap must be positive");
    if (table.wall_count() == 0) return t_cap;

    if (!(table.metric().is_flat() && all_circle_walls(table))) {
        NextCollision nc = next_collision(table, state, t_cap, params);
        return nc.kind == NextCollision::Kind::none ? t_cap : nc.event.t;
    }

    // Exact ray marching against circle copies, wrapping segment by segment.
    struct Copy {
        Vec2 center;
        double r2;
        double reach2;
    };
    double seg_cap = flat_detection_step(table, params);
    std::vector<Copy> copies;
    for (std::size_t w = 0; w < table.wall_count(); ++w) {
        const auto& cw = static_cast<const CircleWall&>(table.wall(w));
        for (const Vec2& o : table.wall_offsets(w))
            copies.push_back({cw.center() + o, cw.radius() * cw.radius(),
                              2.0 * cw.radius() * seg_cap + seg_cap * seg_cap});
    }
    Vec2 pos = table.metric().wrap(state.pos);
    Vec2 vel = state.vel;
    double t = 0.0;
    while (t < t_cap) {
        double seg = std::min(seg_cap, t_cap - t);
        double best = seg + 1.0;
        for (const Copy& cc : copies) {
            Vec2 d = pos - cc.center;
            double c0 = dot(d, d) - cc.r2;
            if (c0 > cc.reach2) continue;
            double b = dot(d, vel);
            double disc = b * b - c0;
            if (disc <= 0.0) continue;
            double s1 = -b - std::sqrt(disc);
            if (s1 > 1e-12 && s1 <= seg && s1 < best) best = s1;
        }
        if (best <= seg) return t + best;
        pos = table.metric().wrap(pos + seg * vel);
        t += seg;
    }
    return t_cap;
}

HorizonResult horizon_probe(const BilliardTable& table, int n_directions, int n_origins,
                            double t_cap, std::uint64_t seed, int jobs,
                            const FlowParams& params) {
    if (n_directions < 1 || n_origins < 1)
        fail(ErrorCode::invalid_argument, "horizon_probe needs at least one direction and origin");
    if (!(t_cap > 0.0)) fail(ErrorCode::invalid_argument, "t_cap must be positive");

    Rng rng(seed);
    std::vector<Vec2> origins;
    origins.reserve(n_origins);
    for (int i = 0; i < n_origins; ++i) {
        Vec2 p;
        int tries = 0;
        do {
            p = {rng.uniform(0.0, table.metric().period_x()),
                 rng.uniform(0.0, table.metric().period_y())};
            if (++tries > 100000)
                fail(ErrorCode::domain, "could not sample an origin outside the obstacles");
        } while (table.signed_distance(p) <= 1e-6);
        origins.push_back(p);
    }

    struct PerOrigin {
        double max_time = 0.0;
        std::vector<double> capped_angles;
    };
    std::vector<PerOrigin> results(origins.size());

    parallel_for(origins.size(), jobs, [&](std::size_t i) {
        PerOrigin& out = results[i];
        for (int k = 0; k < n_directions; ++k) {
            double angle = kTwoPi * k / n_directions;
            PhasePoint s = make_phase_point(table.metric(), origins[i], angle);
            double tf = free_flight_time(table, s, t_cap, params);
            out.max_time = std::max(out.max_time, tf);
            if (tf >= t_cap) out.capped_angles.push_back(angle);
        }
    });

    HorizonResult res;
    res.total_samples = static_cast<long>(origins.size()) * n_directions;
    for (std::size_t i = 0; i < origins.size(); ++i) {
        res.max_free_flight = std::max(res.max_free_flight, results[i].max_time);
        for (double a : results[i].capped_angles) res.capped.push_back({origins[i], a});
    }
    res.capped_count = static_cast<long>(res.capped.size());
    return res;
}

}  // namespace hypb
