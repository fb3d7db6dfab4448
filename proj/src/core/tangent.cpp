#include "tangent.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace hypb {

namespace {

// Internal emission kinds: 0 integration step / stride point, 1 post-collision,
// 2 requested time.
using Sink = std::function<void(double t, JacobiFrame& frame, double k_eff, int kind)>;

double curvature_eff(const MetricField& metric, const TangentOptions& opts, const Vec2& pos) {
    return opts.constant_curvature ? *opts.constant_curvature : metric.curvature(pos);
}

// Joint RK4 step of the base geodesic and one (y, ydot) pair.
void rk4_joint(const MetricField& metric, const TangentOptions& opts, Vec2& pos, Vec2& vel,
               double& y, double& yd, double h) {
    struct S {
        Vec2 dp, dv;
        double dy, dyd;
    };
    auto rhs = [&](const Vec2& p, const Vec2& v, double yy, double yyd) -> S {
        return {v, metric.geodesic_accel(p, v), yyd, -curvature_eff(metric, opts, p) * yy};
    };
    S k1 = rhs(pos, vel, y, yd);
    S k2 = rhs(pos + 0.5 * h * k1.dp, vel + 0.5 * h * k1.dv, y + 0.5 * h * k1.dy,
               yd + 0.5 * h * k1.dyd);
    S k3 = rhs(pos + 0.5 * h * k2.dp, vel + 0.5 * h * k2.dv, y + 0.5 * h * k2.dy,
               yd + 0.5 * h * k2.dyd);
    S k4 = rhs(pos + h * k3.dp, vel + h * k3.dv, y + h * k3.dy, yd + h * k3.dyd);
    pos += (h / 6.0) * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
    vel += (h / 6.0) * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
    y += (h / 6.0) * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
    yd += (h / 6.0) * (k1.dyd + 2.0 * k2.dyd + 2.0 * k3.dyd + k4.dyd);
}

// Integrates one frame along a collision-free flight, advancing the base
// state in place. Emits into the sink at internal steps (or stride points on
// the exact flat path) and exactly at the requested times in [req_begin,
// req_end). The sink may rescale the frame.
void flight_with_sink(const MetricField& metric, const TangentOptions& opts, PhasePoint& base,
                      double t0, double duration, JacobiFrame& frame, const Sink* sink,
                      const double* req_begin, const double* req_end) {
    if (duration <= 0.0) return;
    bool exact = metric.is_flat() && !opts.constant_curvature;
    double t_endpoint = t0 + duration;
    const double* rq = req_begin;

    auto emit = [&](double t, int kind) {
        if (!sink) return;
        double k = curvature_eff(metric, opts, base.pos);
        frame.t = t;
        (*sink)(t, frame, k, kind);
    };

    if (exact) {
        // Free flight: y(t) = y0 + dt * yd0, base advances along a straight
        // chart line. Jump directly between emission boundaries.
        double t = t0;
        for (;;) {
            double target = t_endpoint;
            int kind = 0;
            if (rq != req_end && *rq < t_endpoint - 1e-15) {
                target = *rq;
                kind = 2;
            }
            double stride = opts.sample_stride;
            if (stride > 0.0) {
                double k = std::floor((t - t0) / stride) + 1.0;
                double next_stride = t0 + k * stride;
                while (next_stride <= t + 1e-15) next_stride += stride;
                if (next_stride < target - 1e-15) {
                    target = next_stride;
                    kind = 0;
                }
            }
            double dt = target - t;
            if (dt > 0.0) {
                base.pos = metric.wrap(base.pos + dt * base.vel);
                frame.y += dt * frame.ydot;
            }
            t = target;
            if (kind == 2) {
                emit(t, 2);
                ++rq;
            } else {
                emit(t, 0);
            }
            if (t >= t_endpoint - 1e-15) break;
        }
        return;
    }

    double t = t0;
    for (;;) {
        double target = t_endpoint;
        int kind = 0;
        if (rq != req_end && *rq < t_endpoint - 1e-15) {
            target = *rq;
            kind = 2;
        }
        double h = std::min(opts.step, target - t);
        bool landing = t + h >= target - 1e-15;
        if (!landing) kind = 0;
        rk4_joint(metric, opts, base.pos, base.vel, frame.y, frame.ydot, h);
        base.vel = base.vel * (1.0 / metric.speed(base.pos, base.vel));
        base.pos = metric.wrap(base.pos);
        t += h;
        if (landing) t = target;
        if (landing && kind == 2) {
            emit(t, 2);
            ++rq;
        } else {
            emit(t, 0);
        }
        if (t >= t_endpoint - 1e-15) break;
    }
}

TangentMatrix flight_matrix_only(const MetricField& metric, const TangentOptions& opts,
                                 PhasePoint& base, double t0, double duration) {
    TangentMatrix m;
    m.t_start = t0;
    m.t_end = t0 + duration;
    if (duration <= 0.0) return m;
    if (metric.is_flat() && !opts.constant_curvature) {
        base.pos = metric.wrap(base.pos + duration * base.vel);
        m.a = 1.0;
        m.b = duration;
        m.c = 0.0;
        m.d = 1.0;
        return m;
    }
    // Integrate the two basis columns jointly with one shared base copy.
    PhasePoint b2 = base;
    JacobiFrame c1{1.0, 0.0, t0};
    JacobiFrame c2{0.0, 1.0, t0};
    flight_with_sink(metric, opts, base, t0, duration, c1, nullptr, nullptr, nullptr);
    flight_with_sink(metric, opts, b2, t0, duration, c2, nullptr, nullptr, nullptr);
    m.a = c1.y;
    m.c = c1.ydot;
    m.b = c2.y;
    m.d = c2.ydot;
    return m;
}

FlowParams flow_params_of(const TangentOptions& opts) {
    FlowParams p;
    p.step = opts.step;
    return p;
}

// Cubic Hermite root of y between two samples with a sign change.
double hermite_zero(double t0, double y0, double yd0, double t1, double y1, double yd1) {
    double h = t1 - t0;
    if (h <= 0.0) return t0;
    auto eval = [&](double u) {
        double u2 = u * u, u3 = u2 * u;
        return (2.0 * u3 - 3.0 * u2 + 1.0) * y0 + (u3 - 2.0 * u2 + u) * h * yd0 +
               (-2.0 * u3 + 3.0 * u2) * y1 + (u3 - u2) * h * yd1;
    };
    double lo = 0.0, hi = 1.0;
    double flo = eval(lo);
    for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        double fm = eval(mid);
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-15) break;
    }
    return t0 + 0.5 * (lo + hi) * h;
}

// Walks [t_a, t_b] of a recorded trajectory: flights alternating with
// collision maps. Requested times must be sorted ascending.
void walk_record(const BilliardTable& table, const TrajectoryRecord& record, double t_a,
                 double t_b, const TangentOptions& opts, JacobiFrame& frame, const Sink* sink,
                 const std::vector<double>* requested) {
    if (t_b < t_a) fail(ErrorCode::invalid_argument, "tangent walk: t_b < t_a");
    const MetricField& metric = table.metric();
    PhasePoint base = state_at(table, record, t_a, flow_params_of(opts));

    std::size_t ei = 0;
    while (ei < record.events.size() && record.events[ei].t <= t_a + 1e-15) ++ei;

    const double* rq = nullptr;
    const double* rq_end = nullptr;
    if (requested && !requested->empty()) {
        rq = requested->data();
        rq_end = rq + requested->size();
        while (rq != rq_end && *rq < t_a - 1e-15) ++rq;
    }

    double t = t_a;
    frame.t = t_a;
    while (t < t_b - 1e-15) {
        double te = ei < record.events.size() ? record.events[ei].t : t_b + 1.0;
        double target = std::min(te, t_b);
        // Requested times inside the flight (strictly before the target).
        const double* rq_hi = rq;
        while (rq_hi != rq_end && *rq_hi < target - 1e-12) ++rq_hi;
        flight_with_sink(metric, opts, base, t, target - t, frame, sink, rq, rq_hi);
        rq = rq_hi;
        t = target;
        if (te <= t_b) {
            const CollisionEvent& ev = record.events[ei];
            FlightResult jumped = jacobi_collision(frame, ev);
            frame = jumped.frame;
            base = {ev.pos, ev.v_post};
            if (sink) {
                double k = curvature_eff(metric, opts, base.pos);
                frame.t = t;
                (*sink)(t, frame, k, 1);
            }
            ++ei;
            // Requested times coinciding with the collision get the
            // post-jump frame.
            while (rq != rq_end && *rq <= t + 1e-12) {
                if (sink) {
                    double k = curvature_eff(metric, opts, base.pos);
                    (*sink)(*rq, frame, k, 2);
                }
                ++rq;
            }
        }
    }
    // Requested times at the very end of the window (flights emit strictly
    // before their endpoint).
    while (rq != rq_end && *rq <= t_b + 1e-12) {
        if (sink) {
            double k = curvature_eff(metric, opts, base.pos);
            frame.t = *rq;
            (*sink)(*rq, frame, k, 2);
        }
        ++rq;
    }
}

}  // namespace

FlightResult jacobi_flight(const MetricField& metric, const FlightSegment& segment,
                           const JacobiFrame& frame, const TangentOptions& opts) {
    if (!(segment.duration > 0.0))
        fail(ErrorCode::invalid_argument, "jacobi_flight: segment duration must be positive");
    PhasePoint base = segment.start;
    TangentMatrix m = flight_matrix_only(metric, opts, base, segment.t0, segment.duration);
    FlightResult r;
    r.matrix = m;
    r.frame = m.apply(frame);
    return r;
}

TangentMatrix jacobi_collision_matrix(const CollisionEvent& event) {
    double st = std::sin(event.theta);
    if (!(st > 0.0)) fail(ErrorCode::invalid_argument, "collision map needs sin(theta) > 0");
    TangentMatrix m;
    m.a = -1.0;
    m.b = 0.0;
    m.c = 2.0 * event.kappa / st;
    m.d = -1.0;
    m.t_start = m.t_end = event.t;
    return m;
}

FlightResult jacobi_collision(const JacobiFrame& frame, const CollisionEvent& event) {
    TangentMatrix m = jacobi_collision_matrix(event);
    FlightResult r;
    r.matrix = m;
    r.frame = m.apply(frame);
    r.frame.t = event.t;
    return r;
}

double riccati_collision(double u_minus, const CollisionEvent& event) {
    double st = std::sin(event.theta);
    if (!(st > 0.0)) fail(ErrorCode::invalid_argument, "riccati jump needs sin(theta) > 0");
    return u_minus - 2.0 * event.kappa / st;
}

namespace {

struct TraceBuilder {
    RiccatiTrace trace;
    bool have_prev = false;
    double prev_t = 0.0, prev_y = 0.0, prev_yd = 0.0;

    void add(double t, const JacobiFrame& f, double k_eff, int kind) {
        if (kind != 1 && have_prev && prev_y != 0.0 && f.y != 0.0 &&
            ((prev_y > 0.0) != (f.y > 0.0))) {
            trace.blowup_times.push_back(hermite_zero(prev_t, prev_y, prev_yd, t, f.y, f.ydot));
        }
        RiccatiSample s;
        s.t = t;
        s.y = f.y;
        s.ydot = f.ydot;
        s.ydd = -k_eff * f.y;
        s.u = f.y != 0.0 ? f.ydot / f.y : 0.0;
        s.defined = f.y != 0.0;
        s.collision = kind == 1;
        trace.samples.push_back(s);
        prev_t = t;
        prev_y = f.y;
        prev_yd = f.ydot;
        // Collision samples carry the post-jump frame (y sign flipped by the
        // map, not by a zero of y), so the check above skips kind 1 and sign
        // tracking resumes from the post-jump values.
        have_prev = true;
    }

    void finish(double window) {
        trace.exclusion_window = window;
        for (RiccatiSample& s : trace.samples) {
            for (double tb : trace.blowup_times) {
                if (std::abs(s.t - tb) <= window) {
                    s.defined = false;
                    break;
                }
            }
        }
    }
};

}  // namespace

RiccatiTrace riccati_flight(const MetricField& metric, const FlightSegment& segment, double u0,
                            const TangentOptions& opts) {
    if (!(segment.duration > 0.0))
        fail(ErrorCode::invalid_argument, "riccati_flight: segment duration must be positive");
    TraceBuilder tb;
    JacobiFrame frame{1.0, u0, segment.t0};
    PhasePoint base = segment.start;
    double k0 = curvature_eff(metric, opts, base.pos);
    tb.add(segment.t0, frame, k0, 0);
    Sink sink = [&tb](double t, JacobiFrame& f, double k, int kind) { tb.add(t, f, k, kind); };
    flight_with_sink(metric, opts, base, segment.t0, segment.duration, frame, &sink, nullptr,
                     nullptr);
    tb.finish(opts.blowup_exclusion_window);
    return tb.trace;
}

RiccatiTrace riccati_along(const BilliardTable& table, const TrajectoryRecord& record, double t_a,
                           double t_b, double u0, const TangentOptions& opts) {
    TraceBuilder tb;
    JacobiFrame frame{1.0, u0, t_a};
    PhasePoint s0 = state_at(table, record, t_a, flow_params_of(opts));
    tb.add(t_a, frame, curvature_eff(table.metric(), opts, s0.pos), 0);
    Sink sink = [&tb](double t, JacobiFrame& f, double k, int kind) { tb.add(t, f, k, kind); };
    walk_record(table, record, t_a, t_b, opts, frame, &sink, nullptr);
    tb.finish(opts.blowup_exclusion_window);
    return tb.trace;
}

JacobiFrame propagate_jacobi(const BilliardTable& table, const TrajectoryRecord& record,
                             double t_a, double t_b, JacobiFrame frame, const TangentOptions& opts,
                             const FrameVisitor* visitor,
                             const std::vector<double>* requested_times) {
    Sink sink = [&](double t, JacobiFrame& f, double, int kind) {
        if (visitor) (*visitor)(t, f, kind);
    };
    walk_record(table, record, t_a, t_b, opts, frame, visitor ? &sink : nullptr, requested_times);
    return frame;
}

TangentMatrix interval_matrix(const BilliardTable& table, const TrajectoryRecord& record,
                              double t_a, double t_b, const TangentOptions& opts) {
    const MetricField& metric = table.metric();
    PhasePoint base = state_at(table, record, t_a, flow_params_of(opts));
    std::size_t ei = 0;
    while (ei < record.events.size() && record.events[ei].t <= t_a + 1e-15) ++ei;

    TangentMatrix total;
    total.t_start = t_a;
    total.t_end = t_a;
    double t = t_a;
    while (t < t_b - 1e-15) {
        double te = ei < record.events.size() ? record.events[ei].t : t_b + 1.0;
        double target = std::min(te, t_b);
        if (target > t) {
            TangentMatrix mf = flight_matrix_only(metric, opts, base, t, target - t);
            total = mf * total;
        }
        t = target;
        if (te <= t_b) {
            const CollisionEvent& ev = record.events[ei];
            total = jacobi_collision_matrix(ev) * total;
            base = {ev.pos, ev.v_post};
            ++ei;
        }
    }
    total.t_end = t_b;
    return total;
}

std::vector<TangentMatrix> cocycle(const BilliardTable& table, const TrajectoryRecord& record,
                                   const std::vector<double>& mesh, const TangentOptions& opts) {
    if (mesh.size() < 2) fail(ErrorCode::invalid_argument, "cocycle: mesh needs >= 2 times");
    for (std::size_t i = 0; i + 1 < mesh.size(); ++i)
        if (!(mesh[i] < mesh[i + 1]))
            fail(ErrorCode::invalid_argument, "cocycle: mesh times must be strictly increasing");
    if (mesh.front() < -1e-12 || mesh.back() > record.t_end + 1e-12)
        fail(ErrorCode::invalid_argument, "cocycle: mesh outside the trajectory range");
    for (double m : mesh)
        for (const CollisionEvent& ev : record.events)
            if (std::abs(m - ev.t) < 1e-9)
                fail(ErrorCode::invalid_argument, "cocycle: mesh time coincides with a collision");

    std::vector<TangentMatrix> out;
    out.reserve(mesh.size() - 1);
    for (std::size_t i = 0; i + 1 < mesh.size(); ++i)
        out.push_back(interval_matrix(table, record, mesh[i], mesh[i + 1], opts));
    return out;
}

double riccati_consistency_check(const RiccatiTrace& frame_trace, const RiccatiTrace& u_trace) {
    if (frame_trace.samples.empty() || u_trace.samples.empty())
        fail(ErrorCode::invalid_argument, "consistency check needs nonempty traces");

    auto excluded = [](const RiccatiTrace& tr, double t) {
        for (double tb : tr.blowup_times)
            if (std::abs(t - tb) <= tr.exclusion_window) return true;
        return false;
    };

    // Hermite interpolation of y and ydot on the frame trace.
    const auto& fs = frame_trace.samples;
    auto eval_u = [&](double t, bool& ok) -> double {
        ok = false;
        if (t < fs.front().t - 1e-12 || t > fs.back().t + 1e-12) return 0.0;
        std::size_t hi = 1;
        while (hi < fs.size() && fs[hi].t < t) ++hi;
        if (hi >= fs.size()) hi = fs.size() - 1;
        const RiccatiSample& s0 = fs[hi - 1];
        const RiccatiSample& s1 = fs[hi];
        double h = s1.t - s0.t;
        if (h <= 0.0) return 0.0;
        double u = (t - s0.t) / h;
        u = std::clamp(u, 0.0, 1.0);
        double u2 = u * u, u3 = u2 * u;
        double h00 = 2.0 * u3 - 3.0 * u2 + 1.0, h10 = u3 - 2.0 * u2 + u;
        double h01 = -2.0 * u3 + 3.0 * u2, h11 = u3 - u2;
        double y = h00 * s0.y + h10 * h * s0.ydot + h01 * s1.y + h11 * h * s1.ydot;
        double yd = h00 * s0.ydot + h10 * h * s0.ydd + h01 * s1.ydot + h11 * h * s1.ydd;
        if (y == 0.0) return 0.0;
        ok = true;
        return yd / y;
    };

    double worst = 0.0;
    for (const RiccatiSample& s : u_trace.samples) {
        if (!s.defined || s.collision) continue;
        if (excluded(u_trace, s.t) || excluded(frame_trace, s.t)) continue;
        bool ok = false;
        double u_ref = eval_u(s.t, ok);
        if (!ok) continue;
        worst = std::max(worst, std::abs(s.u - u_ref) / (1.0 + std::abs(s.u)));
    }
    return worst;
}

double alpha_bound(double k_max, double eta) {
    if (!(eta > 0.0)) fail(ErrorCode::invalid_argument, "alpha_bound: eta must be positive");
    if (k_max < 0.0) fail(ErrorCode::invalid_argument, "alpha_bound: k_max must be >= 0");
    double sq = std::sqrt(k_max);
    if (sq * eta < 1e-12) return 1.0 / eta;  // flat limit
    double em = std::expm1(-2.0 * sq * eta);  // e^{-2 sqrt(Kmax) eta} - 1
    return sq * (2.0 + em) / (-em);
}

}  // namespace hypb
