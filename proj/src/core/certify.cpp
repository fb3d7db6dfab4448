#include "certify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace hypb {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

std::string format_num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

double ensemble_mean(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double ensemble_std_error(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : xs) s += (x - mean) * (x - mean);
    double var = s / static_cast<double>(xs.size() - 1);
    return std::sqrt(var / static_cast<double>(xs.size()));
}

TangentOptions tangent_options(const CertifyOptions& opts) {
    TangentOptions t;
    t.step = opts.tangent_step;
    t.constant_curvature = opts.constant_curvature;
    return t;
}

double effective_kmax(const BilliardTable& table, const std::optional<double>& override_k) {
    if (override_k) return std::abs(*override_k);
    return table.metric().kmax();
}

}  // namespace

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::certified:
            return "certified";
        case Verdict::refuted:
            return "refuted-witness";
        case Verdict::inconclusive:
            return "inconclusive";
    }
    return "?";
}

CriterionConstants CriterionConstants::make(double A, double m, double c, double C,
                                            double k_max) {
    if (!(A >= 2.0)) fail(ErrorCode::invalid_argument, "criterion constants: A must be >= 2");
    if (!(c > 0.0)) fail(ErrorCode::invalid_argument, "criterion constants: c must be positive");
    // c == C degenerates the candidate range to a single time, which the
    // sequence construction still supports (constant-step sequences).
    if (!(C >= c)) fail(ErrorCode::invalid_argument, "criterion constants: need c <= C");
    if (!(m > 0.0)) fail(ErrorCode::invalid_argument, "criterion constants: m must be positive");
    if (k_max < 0.0) fail(ErrorCode::invalid_argument, "criterion constants: k_max must be >= 0");

    CriterionConstants k;
    k.A = A;
    k.c = c;
    k.C = C;
    k.k_max = k_max;
    k.m_requested = m;
    double cap = std::min(std::exp(-4.0 * A * C), 0.25);
    if (!(cap > 0.0))
        fail(ErrorCode::invalid_argument, "criterion constants: exp(-4AC) underflows; C too large");
    if (m > cap) {
        k.m = cap;
        k.m_clipped = true;
    } else {
        k.m = m;
    }
    k.eta = std::min(k.m * k.m * k.m / (k_max + 4.0), c / 3.0);
    k.alpha = alpha_bound(k_max, k.eta);
    k.epsilon = std::min({k.m / 2.0, k.m * k.m / 2.0, 1.0 / k.alpha});
    return k;
}

std::vector<PhasePoint> sample_ensemble(const BilliardTable& table, int n, std::uint64_t seed) {
    if (n < 1) fail(ErrorCode::invalid_argument, "ensemble size must be >= 1");
    Rng rng(seed);
    std::vector<PhasePoint> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        Vec2 p;
        int tries = 0;
        do {
            p = {rng.uniform(0.0, table.metric().period_x()),
                 rng.uniform(0.0, table.metric().period_y())};
            if (++tries > 100000)
                fail(ErrorCode::domain, "could not sample a start outside the obstacles");
        } while (table.signed_distance(p) <= 1e-6);
        double angle = rng.uniform(0.0, kTwoPi);
        out.push_back(make_phase_point(table.metric(), p, angle));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lyapunov estimation

HyperbolicityEstimate lyapunov_estimate(const BilliardTable& table, const LyapunovOptions& opts) {
    if (!(opts.duration > 0.0)) fail(ErrorCode::invalid_argument, "lyapunov: duration > 0");
    if (!(opts.renorm_interval > 0.0))
        fail(ErrorCode::invalid_argument, "lyapunov: renorm interval > 0");
    std::vector<PhasePoint> starts = sample_ensemble(table, opts.ensemble, opts.seed);

    TangentOptions topts;
    topts.step = opts.tangent_step;
    topts.constant_curvature = opts.constant_curvature;
    FlowParams fp = opts.flow;
    fp.sample_stride = 0.0;

    struct Slot {
        bool used = false;
        double lambda = 0.0;
        double angle = 0.0;
    };
    std::vector<Slot> slots(starts.size());

    parallel_for(starts.size(), opts.jobs, [&](std::size_t i) {
        TrajectoryRecord rec = flow(table, starts[i], opts.duration, fp);
        if (rec.termination != Termination::time_limit) return;  // dropped

        std::vector<double> renorm_times;
        for (double t = opts.renorm_interval; t < rec.t_end - 1e-9; t += opts.renorm_interval)
            renorm_times.push_back(t);

        double inv_sqrt2 = 0.70710678118654752440;
        JacobiFrame w{inv_sqrt2, inv_sqrt2, 0.0};
        double sum_log = 0.0;
        FrameVisitor vis = [&](double, JacobiFrame& f, int kind) {
            if (kind != 2) return;
            double n = std::hypot(f.y, f.ydot);
            if (n > 0.0) {
                sum_log += std::log(n);
                f.y /= n;
                f.ydot /= n;
            }
        };
        JacobiFrame end =
            propagate_jacobi(table, rec, 0.0, rec.t_end, w, topts, &vis, &renorm_times);
        double nf = std::hypot(end.y, end.ydot);
        if (nf > 0.0) sum_log += std::log(nf);
        slots[i].used = true;
        slots[i].lambda = sum_log / rec.t_end;
        slots[i].angle = projective_angle({end.y, end.ydot});
    });

    HyperbolicityEstimate est;
    for (const Slot& s : slots) {
        if (!s.used) {
            est.dropped += 1;
            continue;
        }
        est.per_trajectory.push_back(s.lambda);
        est.unstable_angles.push_back(s.angle);
    }
    est.used = static_cast<int>(est.per_trajectory.size());
    est.mean = ensemble_mean(est.per_trajectory);
    est.std_error = ensemble_std_error(est.per_trajectory, est.mean);
    return est;
}

// ---------------------------------------------------------------------------
// thm3 mode: greedy time-sequence construction

namespace {

struct CandidateSnapshot {
    double t = 0.0;
    double u = 0.0;
    double min_u = 0.0;
    bool blown = false;
};

// Propagates u from u(t_k^+) = 0 over [t_k, t_k + span] along the record and
// snapshots u, the running minimum and the blow-up flag at each candidate.
std::vector<CandidateSnapshot> scan_candidates(const BilliardTable& table,
                                               const TrajectoryRecord& rec, double t_k,
                                               double span, const std::vector<double>& candidates,
                                               const TangentOptions& topts) {
    std::vector<CandidateSnapshot> out;
    out.reserve(candidates.size());

    double min_u = 0.0;
    bool blown = false;
    bool have_prev = false;
    double prev_y = 1.0;

    FrameVisitor vis = [&](double t, JacobiFrame& f, int kind) {
        // The collision map flips the sign of y; only same-side sign changes
        // mean a zero of y.
        if (kind != 1 && have_prev && prev_y != 0.0 && f.y != 0.0 &&
            (prev_y > 0.0) != (f.y > 0.0))
            blown = true;
        if (f.y == 0.0)
            blown = true;
        else if (!blown)
            min_u = std::min(min_u, f.ydot / f.y);
        prev_y = f.y;
        have_prev = true;
        if (kind == 2) {
            CandidateSnapshot s;
            s.t = t;
            s.u = f.y != 0.0 ? f.ydot / f.y : -std::numeric_limits<double>::infinity();
            s.min_u = min_u;
            s.blown = blown;
            out.push_back(s);
        }
    };
    JacobiFrame u0{1.0, 0.0, t_k};
    propagate_jacobi(table, rec, t_k, t_k + span, u0, topts, &vis, &candidates);
    return out;
}

struct GapStats {
    double min_gap = std::numeric_limits<double>::infinity();
    double max_gap = 0.0;
    double min_jump = std::numeric_limits<double>::infinity();

    void feed(const TrajectoryRecord& rec) {
        for (std::size_t k = 0; k + 1 < rec.events.size(); ++k) {
            double gap = rec.events[k + 1].t - rec.events[k].t;
            min_gap = std::min(min_gap, gap);
            max_gap = std::max(max_gap, gap);
        }
        for (const CollisionEvent& ev : rec.events) {
            double jump = -2.0 * ev.kappa / std::sin(ev.theta);
            min_jump = std::min(min_jump, jump);
        }
    }
};

}  // namespace

Certificate certify_theorem3(const BilliardTable& table, const CertifyOptions& opts) {
    if (!(opts.c > 0.0) || !(opts.C >= opts.c))
        fail(ErrorCode::invalid_argument, "theorem-3 certification requires 0 < c <= C");
    CriterionConstants constants = CriterionConstants::make(
        opts.A, opts.m, opts.c, opts.C, effective_kmax(table, opts.constant_curvature));

    Certificate cert;
    cert.mode = "thm3";
    cert.table = table.name();
    cert.constants = constants;
    cert.ensemble = opts.ensemble;
    cert.duration = opts.duration;
    cert.seed = opts.seed;

    std::vector<PhasePoint> starts = sample_ensemble(table, opts.ensemble, opts.seed);
    TangentOptions topts = tangent_options(opts);
    FlowParams fp = opts.flow;
    fp.sample_stride = 0.0;

    double stride = opts.grid_stride > 0.0 ? opts.grid_stride : constants.c / 10.0;

    std::vector<TrajectoryReport> reports(starts.size());
    parallel_for(starts.size(), opts.jobs, [&](std::size_t i) {
        TrajectoryReport& rep = reports[i];
        rep.index = static_cast<int>(i);
        rep.start = starts[i];
        TrajectoryRecord rec = flow(table, starts[i], opts.duration, fp);
        rep.collisions = static_cast<int>(rec.events.size());
        if (rec.termination == Termination::grazing) {
            rep.outcome = TrajectoryOutcome::dropped_grazing;
            return;
        }
        if (rec.termination == Termination::escaped) {
            rep.outcome = TrajectoryOutcome::dropped_escaped;
            return;
        }

        GapStats gs;
        gs.feed(rec);
        rep.min_gap = rec.events.size() > 1 ? gs.min_gap : 0.0;
        rep.max_gap = rec.events.size() > 1 ? gs.max_gap : 0.0;
        rep.min_jump = rec.events.empty() ? 0.0 : gs.min_jump;

        rep.min_u = 0.0;
        rep.min_terminal_u = std::numeric_limits<double>::infinity();
        rep.outcome = TrajectoryOutcome::completed;

        double t_k = 0.0;
        while (t_k <= rec.t_end - constants.C - 1e-12) {
            // Candidate times t_k + c .. t_k + C on the grid.
            std::vector<double> candidates;
            for (double t = t_k + constants.c; t < t_k + constants.C - 1e-12; t += stride)
                candidates.push_back(t);
            candidates.push_back(t_k + constants.C);

            std::vector<CandidateSnapshot> snaps =
                scan_candidates(table, rec, t_k, constants.C, candidates, topts);

            // Collision times inside (t_k, t_k + C].
            std::vector<double> col;
            for (const CollisionEvent& ev : rec.events)
                if (ev.t > t_k + 1e-15 && ev.t <= t_k + constants.C + 1e-15)
                    col.push_back(ev.t);

            auto admissible = [&](double t) {
                int count = 0;
                for (double tc : col) {
                    if (tc > t) break;
                    ++count;
                    if (tc > t - constants.c && tc < t) return false;  // (t - c, t) open
                }
                return count <= 1;
            };

            int n_admissible = 0;
            int n_failed_A = 0;
            bool found = false;
            for (const CandidateSnapshot& s : snaps) {
                if (!admissible(s.t)) continue;
                ++n_admissible;
                if (s.blown || s.min_u < -constants.A) {
                    ++n_failed_A;
                    continue;
                }
                if (s.u > constants.m) {
                    IntervalSummary iv;
                    iv.t_start = t_k;
                    iv.t_end = s.t;
                    iv.min_u = s.min_u;
                    iv.terminal_u = s.u;
                    iv.collisions = 0;
                    for (double tc : col)
                        if (tc <= s.t) ++iv.collisions;
                    rep.intervals += 1;
                    rep.min_u = std::min(rep.min_u, iv.min_u);
                    rep.min_terminal_u = std::min(rep.min_terminal_u, iv.terminal_u);
                    t_k = s.t;
                    found = true;
                    break;
                }
            }
            if (!found) {
                if (n_admissible > 0 && n_failed_A == n_admissible) {
                    rep.outcome = TrajectoryOutcome::refuted;
                    rep.note = "u >= -A fails for every admissible candidate after t_k = " +
                               format_num(t_k);
                } else {
                    rep.outcome = TrajectoryOutcome::stalled;
                    rep.note = "greedy scan stalled at t_k = " + format_num(t_k) +
                               " (no admissible candidate with u > m)";
                }
                return;
            }
        }
        if (rep.min_terminal_u == std::numeric_limits<double>::infinity())
            rep.min_terminal_u = 0.0;
        if (rep.intervals == 0 && rep.outcome == TrajectoryOutcome::completed) {
            // T < C leaves no room for a full candidate window.
            rep.outcome = TrajectoryOutcome::stalled;
            rep.note = "duration shorter than one full interval window";
        }
    });

    // Aggregate.
    cert.trajectories = std::move(reports);
    cert.min_gap = std::numeric_limits<double>::infinity();
    cert.max_gap = 0.0;
    cert.min_jump = std::numeric_limits<double>::infinity();
    cert.min_u = 0.0;
    cert.min_terminal_u = std::numeric_limits<double>::infinity();
    int completed = 0, refuted = 0, stalled = 0;
    for (const TrajectoryReport& r : cert.trajectories) {
        switch (r.outcome) {
            case TrajectoryOutcome::completed:
                ++completed;
                break;
            case TrajectoryOutcome::refuted:
                ++refuted;
                break;
            case TrajectoryOutcome::stalled:
                ++stalled;
                break;
            default:
                ++cert.dropped;
                continue;
        }
        cert.intervals_total += r.intervals;
        if (r.collisions > 1) {
            cert.min_gap = std::min(cert.min_gap, r.min_gap);
            cert.max_gap = std::max(cert.max_gap, r.max_gap);
        }
        if (r.collisions > 0) cert.min_jump = std::min(cert.min_jump, r.min_jump);
        cert.min_u = std::min(cert.min_u, r.min_u);
        if (r.intervals > 0) cert.min_terminal_u = std::min(cert.min_terminal_u, r.min_terminal_u);
        if (r.outcome == TrajectoryOutcome::refuted && cert.witness.empty()) cert.witness = r.note;
        if (r.outcome == TrajectoryOutcome::stalled && cert.witness.empty()) cert.witness = r.note;
    }
    if (!std::isfinite(cert.min_gap)) cert.min_gap = 0.0;
    if (!std::isfinite(cert.min_jump)) cert.min_jump = 0.0;
    if (!std::isfinite(cert.min_terminal_u)) cert.min_terminal_u = 0.0;
    cert.margin = cert.min_terminal_u;

    if (refuted > 0) {
        cert.verdict = Verdict::refuted;
        cert.reason = "u >= -A clause fails on a sampled trajectory";
    } else if (stalled > 0 || completed == 0) {
        cert.verdict = Verdict::inconclusive;
        cert.reason = stalled > 0 ? "greedy sequence construction stalled"
                                  : "no trajectory completed the window";
    } else {
        cert.verdict = Verdict::certified;
    }
    return cert;
}

// ---------------------------------------------------------------------------
// thm1 mode (geodesic flows)

Certificate certify_theorem1(const BilliardTable& table, const CertifyOptions& opts) {
    if (table.wall_count() != 0)
        fail(ErrorCode::unsupported, "theorem-1 mode requires a wall-free table (geodesic flow)");
    double t0 = opts.t0 > 0.0 ? opts.t0 : opts.duration;
    if (!(t0 > 0.0)) fail(ErrorCode::invalid_argument, "theorem-1 mode requires t0 > 0");

    Certificate cert;
    cert.mode = "thm1";
    cert.table = table.name();
    cert.ensemble = opts.ensemble;
    cert.duration = t0;
    cert.seed = opts.seed;

    std::vector<PhasePoint> starts = sample_ensemble(table, opts.ensemble, opts.seed);
    TangentOptions topts = tangent_options(opts);

    struct Slot {
        bool blown = false;
        double terminal = 0.0;
    };
    std::vector<Slot> slots(starts.size());
    parallel_for(starts.size(), opts.jobs, [&](std::size_t i) {
        RiccatiTrace tr = riccati_flight(table.metric(), {starts[i], 0.0, t0}, 0.0, topts);
        slots[i].blown = !tr.blowup_times.empty();
        slots[i].terminal = tr.terminal_u();
    });

    double margin = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].blown) {
            ok = false;
            if (cert.witness.empty())
                cert.witness = "geodesic " + std::to_string(i) + ": u blows up before t0";
            continue;
        }
        margin = std::min(margin, slots[i].terminal);
        if (!(slots[i].terminal > 0.0)) {
            ok = false;
            if (cert.witness.empty())
                cert.witness = "geodesic " + std::to_string(i) +
                               ": u(t0) = " + format_num(slots[i].terminal) + " is not positive";
        }
    }
    cert.margin = std::isfinite(margin) ? margin : 0.0;
    if (ok) {
        cert.verdict = Verdict::certified;
    } else {
        cert.verdict = Verdict::refuted;
        cert.reason = "u(t0) > 0 clause fails on a sampled geodesic";
    }
    return cert;
}

// ---------------------------------------------------------------------------
// thm4 mode: curvature-integral hypothesis checker

Certificate check_theorem4_hypothesis(const BilliardTable& table, const CertifyOptions& opts) {
    if (table.wall_count() != 0)
        fail(ErrorCode::unsupported, "theorem-4 mode requires a wall-free table (geodesic flow)");
    double t0 = opts.t0 > 0.0 ? opts.t0 : opts.duration;
    if (!(t0 > 0.0)) fail(ErrorCode::invalid_argument, "theorem-4 mode requires t0 > 0");
    if (!(opts.m > 0.0)) fail(ErrorCode::invalid_argument, "theorem-4 mode requires m > 0");

    Certificate cert;
    cert.mode = "thm4";
    cert.table = table.name();
    cert.ensemble = opts.ensemble;
    cert.duration = t0;
    cert.seed = opts.seed;

    const MetricField& metric = table.metric();

    // Nonpositivity of K on a dense grid.
    double max_k = -std::numeric_limits<double>::infinity();
    Vec2 worst_p{0.0, 0.0};
    if (opts.constant_curvature) {
        max_k = *opts.constant_curvature;
    } else {
        const int grid = 256;
        for (int i = 0; i < grid; ++i)
            for (int j = 0; j < grid; ++j) {
                Vec2 p{metric.period_x() * i / grid, metric.period_y() * j / grid};
                double k = metric.curvature(p);
                if (k > max_k) {
                    max_k = k;
                    worst_p = p;
                }
            }
    }
    if (max_k > 1e-9) {
        cert.verdict = Verdict::refuted;
        cert.reason = "curvature is not nonpositive";
        cert.witness = "K = " + format_num(max_k) + " at (" + format_num(worst_p.x) + ", " +
                       format_num(worst_p.y) + ")";
        cert.margin = max_k;
        return cert;
    }

    std::vector<PhasePoint> starts = sample_ensemble(table, opts.ensemble, opts.seed);
    std::vector<double> integrals(starts.size());
    parallel_for(starts.size(), opts.jobs, [&](std::size_t i) {
        // Composite trapezoid of K along the geodesic at the integrator stride.
        PhasePoint s = starts[i];
        double h = opts.tangent_step;
        double acc = 0.0;
        double k_prev = opts.constant_curvature ? *opts.constant_curvature
                                                : metric.curvature(s.pos);
        double t = 0.0;
        FlowParams fp;
        fp.step = h;
        while (t < t0 - 1e-12) {
            double dt = std::min(h, t0 - t);
            s = geodesic_step(metric, s, dt, fp);
            double k_here =
                opts.constant_curvature ? *opts.constant_curvature : metric.curvature(s.pos);
            acc += 0.5 * (k_prev + k_here) * dt;
            k_prev = k_here;
            t += dt;
        }
        integrals[i] = acc;
    });

    double worst = -std::numeric_limits<double>::infinity();
    for (double v : integrals) worst = std::max(worst, v);
    cert.margin = worst;
    if (worst <= -opts.m) {
        cert.verdict = Verdict::certified;
    } else {
        cert.verdict = Verdict::refuted;
        cert.reason = "curvature integral clause fails";
        cert.witness = "worst integral " + format_num(worst) + " > -m = " + format_num(-opts.m);
    }
    return cert;
}

// ---------------------------------------------------------------------------
// Sinai specialization

Certificate certify_sinai(const BilliardTable& table, const CertifyOptions& opts) {
    if (!table.is_flat())
        fail(ErrorCode::unsupported, "sinai mode requires a flat table (phi = 0)");
    if (table.wall_count() == 0)
        fail(ErrorCode::unsupported, "sinai mode requires at least one wall");
    DispersingReport disp = table.is_dispersing(256);
    if (!disp.dispersing)
        fail(ErrorCode::unsupported,
             "sinai mode requires a dispersing table (sampled kappa reaches " +
                 format_num(disp.worst_kappa.value_or(0.0)) + ")");

    Certificate cert;
    cert.mode = "sinai";
    cert.table = table.name();
    cert.ensemble = opts.ensemble;
    cert.duration = opts.duration;
    cert.seed = opts.seed;

    Rng master(opts.seed);
    std::uint64_t ensemble_seed = master.derive_seed();
    std::uint64_t probe_seed = master.derive_seed();

    HorizonResult probe = horizon_probe(table, opts.probe_directions, opts.probe_origins,
                                        opts.probe_t_cap, probe_seed, opts.jobs, opts.flow);
    if (probe.capped_count > 0) {
        cert.verdict = Verdict::inconclusive;
        cert.reason = "infinite-horizon-candidate";
        std::ostringstream w;
        w << probe.capped_count << " of " << probe.total_samples
          << " probe samples reached t_cap = " << format_num(opts.probe_t_cap)
          << " without a collision; first candidate: origin = ("
          << format_num(probe.capped.front().origin.x) << ", "
          << format_num(probe.capped.front().origin.y)
          << "), angle = " << format_num(probe.capped.front().angle);
        cert.witness = w.str();
        return cert;
    }

    std::vector<PhasePoint> starts = sample_ensemble(table, opts.ensemble, ensemble_seed);
    FlowParams fp = opts.flow;
    fp.sample_stride = 0.0;
    std::vector<TrajectoryRecord> records(starts.size());
    parallel_for(starts.size(), opts.jobs, [&](std::size_t i) {
        records[i] = flow(table, starts[i], opts.duration, fp);
    });

    double min_gap = std::numeric_limits<double>::infinity();
    double max_gap = 0.0;
    long total_events = 0;
    for (const TrajectoryRecord& rec : records) {
        if (rec.termination != Termination::time_limit) continue;
        total_events += static_cast<long>(rec.events.size());
        for (std::size_t k = 0; k + 1 < rec.events.size(); ++k) {
            double gap = rec.events[k + 1].t - rec.events[k].t;
            min_gap = std::min(min_gap, gap);
            max_gap = std::max(max_gap, gap);
        }
    }
    if (!std::isfinite(min_gap) || total_events < 2) {
        cert.verdict = Verdict::inconclusive;
        cert.reason = "insufficient collisions to measure free paths";
        return cert;
    }

    double c_measured = opts.c > 0.0 ? opts.c : min_gap;
    double C_measured = opts.C > 0.0 ? opts.C : std::max(max_gap, probe.max_free_flight);
    if (!(C_measured > c_measured)) C_measured = c_measured * (1.0 + 1e-9);
    double kappa_max = disp.worst_kappa.value();  // largest (least negative) curvature
    double m_raw = -2.0 * kappa_max;
    CriterionConstants constants =
        CriterionConstants::make(opts.A, m_raw, c_measured, C_measured, 0.0);
    cert.constants = constants;
    cert.min_gap = min_gap;
    cert.max_gap = max_gap;

    // Per-trajectory certification with t_k = collision times, plus an inline
    // tangent-growth estimate along the same events.
    const MetricField& metric = table.metric();
    std::vector<TrajectoryReport> reports(records.size());
    struct Expansion {
        bool used = false;
        double lambda = 0.0;
        double angle = 0.0;
    };
    std::vector<Expansion> expansion(records.size());

    parallel_for(records.size(), opts.jobs, [&](std::size_t i) {
        TrajectoryReport& rep = reports[i];
        const TrajectoryRecord& rec = records[i];
        rep.index = static_cast<int>(i);
        rep.start = rec.initial;
        rep.collisions = static_cast<int>(rec.events.size());
        if (rec.termination == Termination::grazing) {
            rep.outcome = TrajectoryOutcome::dropped_grazing;
            return;
        }
        if (rec.termination == Termination::escaped) {
            rep.outcome = TrajectoryOutcome::dropped_escaped;
            return;
        }
        if (rec.events.size() < 2) {
            rep.outcome = TrajectoryOutcome::stalled;
            rep.note = "fewer than two collisions";
            return;
        }

        rep.outcome = TrajectoryOutcome::completed;
        rep.min_gap = std::numeric_limits<double>::infinity();
        rep.min_jump = std::numeric_limits<double>::infinity();
        rep.min_u = 0.0;
        rep.min_terminal_u = std::numeric_limits<double>::infinity();

        double inv_sqrt2 = 0.70710678118654752440;
        JacobiFrame w{inv_sqrt2, inv_sqrt2, 0.0};
        double sum_log = 0.0;
        auto flight_w = [&](const PhasePoint& base, double t0, double dur) {
            if (dur <= 0.0) return;
            FlightSegment seg{base, t0, dur};
            w = jacobi_flight(metric, seg, w).frame;
        };
        auto renorm_w = [&]() {
            double n = std::hypot(w.y, w.ydot);
            if (n > 0.0) {
                sum_log += std::log(n);
                w.y /= n;
                w.ydot /= n;
            }
        };

        flight_w(rec.initial, 0.0, rec.events.front().t);
        w = jacobi_collision(w, rec.events.front()).frame;
        renorm_w();

        for (std::size_t k = 0; k + 1 < rec.events.size(); ++k) {
            const CollisionEvent& e0 = rec.events[k];
            const CollisionEvent& e1 = rec.events[k + 1];
            double gap = e1.t - e0.t;
            rep.min_gap = std::min(rep.min_gap, gap);
            rep.max_gap = std::max(rep.max_gap, gap);
            if (gap < constants.c - 1e-9 || gap > constants.C + 1e-9) {
                rep.outcome = TrajectoryOutcome::stalled;
                rep.note = "free path " + format_num(gap) + " outside [c, C]";
            }

            // Riccati clause on [t_k, t_{k+1}]: u(t_k^+) = 0, flat free
            // flight keeps u = 0, then the dispersing jump at t_{k+1}.
            PhasePoint base{e0.pos, e0.v_post};
            JacobiFrame f{1.0, 0.0, e0.t};
            FlightSegment seg{base, e0.t, gap};
            FlightResult flight = jacobi_flight(metric, seg, f);
            double u_pre = flight.frame.y != 0.0 ? flight.frame.ydot / flight.frame.y : 0.0;
            FlightResult jumped = jacobi_collision(flight.frame, e1);
            double u_post = jumped.frame.y != 0.0 ? jumped.frame.ydot / jumped.frame.y
                                                  : -std::numeric_limits<double>::infinity();
            double interval_min = std::min({0.0, u_pre, u_post});
            rep.min_u = std::min(rep.min_u, interval_min);
            rep.min_terminal_u = std::min(rep.min_terminal_u, u_post);
            rep.min_jump = std::min(rep.min_jump, u_post);
            rep.intervals += 1;
            if (interval_min < -constants.A || !(u_post > constants.m)) {
                rep.outcome = TrajectoryOutcome::refuted;
                rep.note = "interval [" + format_num(e0.t) + ", " + format_num(e1.t) +
                           "] violates the Riccati clauses (u+ = " + format_num(u_post) + ")";
            }

            // Tangent growth along the same interval.
            flight_w({e0.pos, e0.v_post}, e0.t, gap);
            w = jacobi_collision(w, e1).frame;
            renorm_w();
        }
        flight_w({rec.events.back().pos, rec.events.back().v_post}, rec.events.back().t,
                 rec.t_end - rec.events.back().t);
        renorm_w();
        expansion[i].used = true;
        expansion[i].lambda = sum_log / rec.t_end;
        expansion[i].angle = projective_angle({w.y, w.ydot});
    });

    cert.trajectories = std::move(reports);
    HyperbolicityEstimate est;
    for (const Expansion& e : expansion) {
        if (!e.used) continue;
        est.per_trajectory.push_back(e.lambda);
        est.unstable_angles.push_back(e.angle);
    }
    est.used = static_cast<int>(est.per_trajectory.size());
    est.dropped = static_cast<int>(expansion.size()) - est.used;
    est.mean = ensemble_mean(est.per_trajectory);
    est.std_error = ensemble_std_error(est.per_trajectory, est.mean);
    cert.expansion = est;

    cert.min_jump = std::numeric_limits<double>::infinity();
    cert.min_u = 0.0;
    cert.min_terminal_u = std::numeric_limits<double>::infinity();
    int completed = 0, refuted = 0, stalled = 0;
    for (const TrajectoryReport& r : cert.trajectories) {
        switch (r.outcome) {
            case TrajectoryOutcome::completed:
                ++completed;
                break;
            case TrajectoryOutcome::refuted:
                ++refuted;
                break;
            case TrajectoryOutcome::stalled:
                ++stalled;
                break;
            default:
                ++cert.dropped;
                continue;
        }
        cert.intervals_total += r.intervals;
        if (r.intervals > 0) {
            cert.min_jump = std::min(cert.min_jump, r.min_jump);
            cert.min_u = std::min(cert.min_u, r.min_u);
            cert.min_terminal_u = std::min(cert.min_terminal_u, r.min_terminal_u);
        }
        if (r.outcome != TrajectoryOutcome::completed && cert.witness.empty())
            cert.witness = "trajectory " + std::to_string(r.index) + ": " + r.note;
    }
    if (!std::isfinite(cert.min_jump)) cert.min_jump = 0.0;
    if (!std::isfinite(cert.min_terminal_u)) cert.min_terminal_u = 0.0;
    cert.margin = cert.min_terminal_u;

    if (refuted > 0) {
        cert.verdict = Verdict::refuted;
        cert.reason = "Riccati clauses fail on a sampled trajectory";
    } else if (stalled > 0 || completed == 0) {
        cert.verdict = Verdict::inconclusive;
        cert.reason = "free-path bounds violated or insufficient data";
    } else {
        cert.verdict = Verdict::certified;
    }
    return cert;
}

bool revalidate_margin(const Certificate& cert, double m_prime) {
    if (cert.verdict != Verdict::certified) return false;
    if (!cert.constants) return false;
    if (!(m_prime < cert.constants->m)) return false;
    for (const TrajectoryReport& r : cert.trajectories) {
        if (r.outcome != TrajectoryOutcome::completed) continue;
        if (r.intervals > 0 && !(r.min_terminal_u > m_prime)) return false;
    }
    return true;
}

std::string render_report(const Certificate& cert) {
    std::ostringstream out;
    out << "hypb.certificate.version = 1\n";
    out << "mode = " << cert.mode << "\n";
    out << "table = " << cert.table << "\n";
    out << "verdict = " << verdict_name(cert.verdict) << "\n";
    out << "reason = " << (cert.reason.empty() ? "-" : cert.reason) << "\n";
    out << "ensemble = " << cert.ensemble << "\n";
    out << "duration = " << format_num(cert.duration) << "\n";
    out << "seed = " << cert.seed << "\n";
    out << "dropped = " << cert.dropped << "\n";
    out << "window = [0, " << format_num(cert.duration)
        << "] (bi-infinite sequence truncated to the finite run)\n";
    if (cert.constants) {
        const CriterionConstants& k = *cert.constants;
        out << "A = " << format_num(k.A) << "\n";
        out << "m = " << format_num(k.m) << "\n";
        out << "m_requested = " << format_num(k.m_requested) << "\n";
        out << "m_clipped = " << (k.m_clipped ? "true" : "false") << "\n";
        out << "c = " << format_num(k.c) << "\n";
        out << "C = " << format_num(k.C) << "\n";
        out << "k_max = " << format_num(k.k_max) << "\n";
        out << "eta = " << format_num(k.eta) << "\n";
        out << "alpha = " << format_num(k.alpha) << "\n";
        out << "epsilon = " << format_num(k.epsilon) << "\n";
    }
    out << "min_gap = " << format_num(cert.min_gap) << "\n";
    out << "max_gap = " << format_num(cert.max_gap) << "\n";
    out << "min_jump = " << format_num(cert.min_jump) << "\n";
    out << "min_u = " << format_num(cert.min_u) << "\n";
    out << "min_terminal_u = " << format_num(cert.min_terminal_u) << "\n";
    out << "margin = " << format_num(cert.margin) << "\n";
    out << "intervals_total = " << cert.intervals_total << "\n";
    if (cert.expansion) {
        out << "lyapunov_mean = " << format_num(cert.expansion->mean) << "\n";
        out << "lyapunov_std_error = " << format_num(cert.expansion->std_error) << "\n";
        out << "lyapunov_used = " << cert.expansion->used << "\n";
        out << "lambda_contraction = " << format_num(std::exp(-cert.expansion->mean)) << "\n";
    }
    out << "witness = " << (cert.witness.empty() ? "-" : cert.witness) << "\n";
    out << "trajectories = " << cert.trajectories.size() << "\n";
    for (const TrajectoryReport& r : cert.trajectories) {
        const char* oc = "?";
        switch (r.outcome) {
            case TrajectoryOutcome::completed:
                oc = "completed";
                break;
            case TrajectoryOutcome::refuted:
                oc = "refuted";
                break;
            case TrajectoryOutcome::stalled:
                oc = "stalled";
                break;
            case TrajectoryOutcome::dropped_grazing:
                oc = "dropped-grazing";
                break;
            case TrajectoryOutcome::dropped_escaped:
                oc = "dropped-escaped";
                break;
        }
        out << "trajectory." << r.index << " = outcome=" << oc << " collisions=" << r.collisions
            << " intervals=" << r.intervals << " min_gap=" << format_num(r.min_gap)
            << " max_gap=" << format_num(r.max_gap) << " min_jump=" << format_num(r.min_jump)
            << " min_u=" << format_num(r.min_u)
            << " min_terminal_u=" << format_num(r.min_terminal_u);
        if (!r.note.empty()) out << " note=\"" << r.note << "\"";
        out << "\n";
    }
    return out.str();
}

}  // namespace hypb
