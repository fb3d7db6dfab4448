#include "hypb/hypb.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "../core/certify.hpp"
#include "../core/cones.hpp"
#include "../core/dynamics.hpp"
#include "../core/error.hpp"
#include "../core/table.hpp"
#include "../core/tangent.hpp"

namespace {

thread_local std::string g_last_error;

hypb_status status_of(hypb::ErrorCode code) {
    using hypb::ErrorCode;
    switch (code) {
        case ErrorCode::invalid_argument:
            return HYPB_ERR_INVALID_ARGUMENT;
        case ErrorCode::parse:
            return HYPB_ERR_PARSE;
        case ErrorCode::domain:
            return HYPB_ERR_DOMAIN;
        case ErrorCode::grazing:
            return HYPB_ERR_GRAZING;
        case ErrorCode::unsupported:
            return HYPB_ERR_UNSUPPORTED;
        case ErrorCode::internal:
            return HYPB_ERR_INTERNAL;
    }
    return HYPB_ERR_INTERNAL;
}

template <typename Fn>
hypb_status guarded(Fn&& fn) {
    try {
        fn();
        return HYPB_OK;
    } catch (const hypb::Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return HYPB_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return HYPB_ERR_INTERNAL;
    }
}

hypb_status invalid(const char* msg) {
    g_last_error = msg;
    return HYPB_ERR_INVALID_ARGUMENT;
}

}  // namespace

struct hypb_table {
    std::shared_ptr<const hypb::BilliardTable> table;
};

struct hypb_trajectory {
    hypb::TrajectoryRecord record;
};

struct hypb_riccati_trace {
    hypb::RiccatiTrace trace;
};

struct hypb_lyapunov_result {
    hypb::HyperbolicityEstimate est;
};

struct hypb_horizon_result {
    hypb::HorizonResult res;
};

struct hypb_certificate {
    hypb::Certificate cert;
    std::string report;
};

struct hypb_cone_report {
    bool all_pass = true;
    long pass_count = 0;
    double min_gain = 0.0;
    double bound = 0.0;
    hypb::InvariantDirections dirs;
    std::string text;
};

extern "C" {

const char* hypb_version(void) { return HYPB_VERSION_STRING; }

const char* hypb_last_error(void) { return g_last_error.c_str(); }

/* ---------------------------------------------------------------- tables */

hypb_status hypb_table_load(const char* path, hypb_table** out) {
    if (!path || !out) return invalid("hypb_table_load: null argument");
    return guarded([&] { *out = new hypb_table{hypb::load_table(path)}; });
}

hypb_status hypb_table_parse(const char* text, const char* name, hypb_table** out) {
    if (!text || !out) return invalid("hypb_table_parse: null argument");
    return guarded(
        [&] { *out = new hypb_table{hypb::parse_table(text, name ? name : "table")}; });
}

hypb_status hypb_table_resolve(const char* name_or_path, hypb_table** out) {
    if (!name_or_path || !out) return invalid("hypb_table_resolve: null argument");
    return guarded([&] { *out = new hypb_table{hypb::resolve_table(name_or_path)}; });
}

void hypb_table_free(hypb_table* table) { delete table; }

const char* hypb_table_name(const hypb_table* table) {
    return table ? table->table->name().c_str() : "";
}

int hypb_table_is_flat(const hypb_table* table) {
    return table && table->table->is_flat() ? 1 : 0;
}

size_t hypb_table_wall_count(const hypb_table* table) {
    return table ? table->table->wall_count() : 0;
}

hypb_status hypb_table_kmax(const hypb_table* table, double* out) {
    if (!table || !out) return invalid("hypb_table_kmax: null argument");
    return guarded([&] { *out = table->table->metric().kmax(); });
}

hypb_status hypb_table_is_dispersing(const hypb_table* table, int samples, int* dispersing,
                                     double* worst_kappa, int* has_walls) {
    if (!table) return invalid("hypb_table_is_dispersing: null table");
    return guarded([&] {
        hypb::DispersingReport rep = table->table->is_dispersing(samples);
        if (dispersing) *dispersing = rep.dispersing ? 1 : 0;
        if (worst_kappa) *worst_kappa = rep.worst_kappa.value_or(0.0);
        if (has_walls) *has_walls = rep.worst_kappa.has_value() ? 1 : 0;
    });
}

size_t hypb_scenario_count(void) { return hypb::builtin_scenarios().size(); }

hypb_status hypb_scenario_info(size_t index, const char** name, const char** description) {
    const auto& all = hypb::builtin_scenarios();
    if (index >= all.size()) return invalid("hypb_scenario_info: index out of range");
    if (name) *name = all[index].name.c_str();
    if (description) *description = all[index].description.c_str();
    return HYPB_OK;
}

hypb_status hypb_scenario_definition(const char* name, const char** definition) {
    if (!name || !definition) return invalid("hypb_scenario_definition: null argument");
    for (const auto& s : hypb::builtin_scenarios()) {
        if (s.name == name) {
            *definition = s.definition.c_str();
            return HYPB_OK;
        }
    }
    g_last_error = std::string("unknown scenario '") + name + "'";
    return HYPB_ERR_INVALID_ARGUMENT;
}

/* ------------------------------------------------------------ simulation */

hypb_status hypb_simulate(const hypb_table* table, double x0, double y0, double angle0,
                          double duration, double sample_stride, hypb_trajectory** out) {
    if (!table || !out) return invalid("hypb_simulate: null argument");
    return guarded([&] {
        hypb::FlowParams params;
        params.sample_stride = sample_stride;
        hypb::PhasePoint s = hypb::make_phase_point(*table->table, {x0, y0}, angle0);
        auto* traj = new hypb_trajectory{hypb::flow(*table->table, s, duration, params)};
        *out = traj;
    });
}

void hypb_trajectory_free(hypb_trajectory* traj) { delete traj; }

hypb_termination hypb_trajectory_termination(const hypb_trajectory* traj) {
    switch (traj->record.termination) {
        case hypb::Termination::time_limit:
            return HYPB_TERM_TIME_LIMIT;
        case hypb::Termination::grazing:
            return HYPB_TERM_GRAZING;
        case hypb::Termination::escaped:
            return HYPB_TERM_ESCAPED;
    }
    return HYPB_TERM_TIME_LIMIT;
}

double hypb_trajectory_t_end(const hypb_trajectory* traj) { return traj->record.t_end; }

size_t hypb_trajectory_sample_count(const hypb_trajectory* traj) {
    return traj->record.samples.size();
}

hypb_status hypb_trajectory_sample(const hypb_trajectory* traj, size_t i, double row[6]) {
    if (!traj || !row) return invalid("hypb_trajectory_sample: null argument");
    if (i >= traj->record.samples.size())
        return invalid("hypb_trajectory_sample: index out of range");
    const hypb::StateSample& s = traj->record.samples[i];
    row[0] = s.t;
    row[1] = s.pos.x;
    row[2] = s.pos.y;
    row[3] = s.vel.x;
    row[4] = s.vel.y;
    row[5] = s.event_flag;
    return HYPB_OK;
}

size_t hypb_trajectory_collision_count(const hypb_trajectory* traj) {
    return traj->record.events.size();
}

hypb_status hypb_trajectory_collision(const hypb_trajectory* traj, size_t i, double row[5]) {
    if (!traj || !row) return invalid("hypb_trajectory_collision: null argument");
    if (i >= traj->record.events.size())
        return invalid("hypb_trajectory_collision: index out of range");
    const hypb::CollisionEvent& e = traj->record.events[i];
    row[0] = e.t;
    row[1] = e.wall;
    row[2] = e.r;
    row[3] = e.theta;
    row[4] = e.kappa;
    return HYPB_OK;
}

/* ---------------------------------------------------------------- riccati */

hypb_status hypb_riccati(const hypb_table* table, double x0, double y0, double angle0, double u0,
                         double duration, double sample_stride, hypb_riccati_trace** out) {
    if (!table || !out) return invalid("hypb_riccati: null argument");
    return guarded([&] {
        hypb::FlowParams params;
        params.sample_stride = 0.0;
        hypb::PhasePoint s = hypb::make_phase_point(*table->table, {x0, y0}, angle0);
        hypb::TrajectoryRecord rec = hypb::flow(*table->table, s, duration, params);
        hypb::TangentOptions topts;
        topts.sample_stride = sample_stride;
        hypb::RiccatiTrace trace =
            hypb::riccati_along(*table->table, rec, 0.0, rec.t_end, u0, topts);
        // Curved metrics sample at every integration step; thin the plain
        // rows to the requested stride (collision and blow-up rows stay).
        if (sample_stride > 0.0 && !trace.samples.empty()) {
            std::vector<hypb::RiccatiSample> kept;
            kept.reserve(trace.samples.size());
            double last_t = -1e300;
            for (std::size_t i = 0; i < trace.samples.size(); ++i) {
                const hypb::RiccatiSample& smp = trace.samples[i];
                bool keep = smp.collision || !smp.defined || i + 1 == trace.samples.size() ||
                            smp.t >= last_t + sample_stride * (1.0 - 1e-9);
                if (keep) {
                    kept.push_back(smp);
                    last_t = smp.t;
                }
            }
            trace.samples = std::move(kept);
        }
        *out = new hypb_riccati_trace{std::move(trace)};
    });
}

void hypb_riccati_trace_free(hypb_riccati_trace* trace) { delete trace; }

size_t hypb_riccati_sample_count(const hypb_riccati_trace* trace) {
    return trace->trace.samples.size();
}

hypb_status hypb_riccati_sample(const hypb_riccati_trace* trace, size_t i, double row[6]) {
    if (!trace || !row) return invalid("hypb_riccati_sample: null argument");
    if (i >= trace->trace.samples.size())
        return invalid("hypb_riccati_sample: index out of range");
    const hypb::RiccatiSample& s = trace->trace.samples[i];
    row[0] = s.t;
    row[1] = s.defined ? s.u : std::nan("");
    row[2] = s.y;
    row[3] = s.ydot;
    row[4] = s.defined ? 0.0 : 1.0;
    row[5] = s.collision ? 1.0 : 0.0;
    return HYPB_OK;
}

size_t hypb_riccati_blowup_count(const hypb_riccati_trace* trace) {
    return trace->trace.blowup_times.size();
}

hypb_status hypb_riccati_blowup_time(const hypb_riccati_trace* trace, size_t i, double* t) {
    if (!trace || !t) return invalid("hypb_riccati_blowup_time: null argument");
    if (i >= trace->trace.blowup_times.size())
        return invalid("hypb_riccati_blowup_time: index out of range");
    *t = trace->trace.blowup_times[i];
    return HYPB_OK;
}

/* --------------------------------------------------------------- lyapunov */

hypb_status hypb_lyapunov(const hypb_table* table, int ensemble, double duration, uint64_t seed,
                          int jobs, hypb_lyapunov_result** out) {
    if (!table || !out) return invalid("hypb_lyapunov: null argument");
    return guarded([&] {
        hypb::LyapunovOptions opts;
        opts.ensemble = ensemble;
        opts.duration = duration;
        opts.seed = seed;
        opts.jobs = jobs;
        *out = new hypb_lyapunov_result{hypb::lyapunov_estimate(*table->table, opts)};
    });
}

void hypb_lyapunov_result_free(hypb_lyapunov_result* res) { delete res; }

double hypb_lyapunov_mean(const hypb_lyapunov_result* res) { return res->est.mean; }
double hypb_lyapunov_std_error(const hypb_lyapunov_result* res) { return res->est.std_error; }
int hypb_lyapunov_used(const hypb_lyapunov_result* res) { return res->est.used; }
int hypb_lyapunov_dropped(const hypb_lyapunov_result* res) { return res->est.dropped; }

hypb_status hypb_lyapunov_exponent(const hypb_lyapunov_result* res, int i, double* out) {
    if (!res || !out) return invalid("hypb_lyapunov_exponent: null argument");
    if (i < 0 || static_cast<size_t>(i) >= res->est.per_trajectory.size())
        return invalid("hypb_lyapunov_exponent: index out of range");
    *out = res->est.per_trajectory[i];
    return HYPB_OK;
}

/* ---------------------------------------------------------------- horizon */

hypb_status hypb_horizon_probe(const hypb_table* table, int n_directions, int n_origins,
                               double t_cap, uint64_t seed, int jobs, hypb_horizon_result** out) {
    if (!table || !out) return invalid("hypb_horizon_probe: null argument");
    return guarded([&] {
        *out = new hypb_horizon_result{
            hypb::horizon_probe(*table->table, n_directions, n_origins, t_cap, seed, jobs)};
    });
}

void hypb_horizon_result_free(hypb_horizon_result* res) { delete res; }

double hypb_horizon_max_free_flight(const hypb_horizon_result* res) {
    return res->res.max_free_flight;
}
long hypb_horizon_total_samples(const hypb_horizon_result* res) { return res->res.total_samples; }
long hypb_horizon_capped_count(const hypb_horizon_result* res) { return res->res.capped_count; }

hypb_status hypb_horizon_capped_sample(const hypb_horizon_result* res, long i, double row[3]) {
    if (!res || !row) return invalid("hypb_horizon_capped_sample: null argument");
    if (i < 0 || static_cast<size_t>(i) >= res->res.capped.size())
        return invalid("hypb_horizon_capped_sample: index out of range");
    row[0] = res->res.capped[i].origin.x;
    row[1] = res->res.capped[i].origin.y;
    row[2] = res->res.capped[i].angle;
    return HYPB_OK;
}

/* ---------------------------------------------------------------- certify */

void hypb_certify_options_init(hypb_certify_options* opts) {
    if (!opts) return;
    opts->ensemble = 100;
    opts->duration = 1000.0;
    opts->seed = 1;
    opts->jobs = 0;
    opts->A = 2.0;
    opts->m = 0.01;
    opts->c = 0.0;
    opts->C = 0.0;
    opts->t0 = 0.0;
    opts->grid_stride = 0.0;
    opts->probe_directions = 720;
    opts->probe_origins = 50;
    opts->probe_t_cap = 50.0;
}

hypb_status hypb_certify(const hypb_table* table, hypb_certify_mode mode,
                         const hypb_certify_options* opts, hypb_certificate** out) {
    if (!table || !opts || !out) return invalid("hypb_certify: null argument");
    return guarded([&] {
        hypb::CertifyOptions o;
        o.ensemble = opts->ensemble;
        o.duration = opts->duration;
        o.seed = opts->seed;
        o.jobs = opts->jobs;
        o.A = opts->A;
        o.m = opts->m;
        o.c = opts->c;
        o.C = opts->C;
        o.t0 = opts->t0;
        o.grid_stride = opts->grid_stride;
        o.probe_directions = opts->probe_directions;
        o.probe_origins = opts->probe_origins;
        o.probe_t_cap = opts->probe_t_cap;

        hypb::Certificate cert;
        switch (mode) {
            case HYPB_MODE_THM3:
                cert = hypb::certify_theorem3(*table->table, o);
                break;
            case HYPB_MODE_THM1:
                cert = hypb::certify_theorem1(*table->table, o);
                break;
            case HYPB_MODE_THM4:
                cert = hypb::check_theorem4_hypothesis(*table->table, o);
                break;
            case HYPB_MODE_SINAI:
                cert = hypb::certify_sinai(*table->table, o);
                break;
            default:
                hypb::fail(hypb::ErrorCode::invalid_argument, "unknown certification mode");
        }
        auto* c = new hypb_certificate;
        c->cert = std::move(cert);
        c->report = hypb::render_report(c->cert);
        *out = c;
    });
}

void hypb_certificate_free(hypb_certificate* cert) { delete cert; }

hypb_verdict hypb_certificate_verdict(const hypb_certificate* cert) {
    switch (cert->cert.verdict) {
        case hypb::Verdict::certified:
            return HYPB_VERDICT_CERTIFIED;
        case hypb::Verdict::refuted:
            return HYPB_VERDICT_REFUTED;
        case hypb::Verdict::inconclusive:
            return HYPB_VERDICT_INCONCLUSIVE;
    }
    return HYPB_VERDICT_INCONCLUSIVE;
}

const char* hypb_certificate_reason(const hypb_certificate* cert) {
    return cert->cert.reason.c_str();
}

const char* hypb_certificate_witness(const hypb_certificate* cert) {
    return cert->cert.witness.c_str();
}

const char* hypb_certificate_report(const hypb_certificate* cert) {
    return cert->report.c_str();
}

hypb_status hypb_certificate_value(const hypb_certificate* cert, const char* key, double* out) {
    if (!cert || !key || !out) return invalid("hypb_certificate_value: null argument");
    const hypb::Certificate& c = cert->cert;
    std::string k = key;
    if (k == "margin") {
        *out = c.margin;
        return HYPB_OK;
    }
    if (k == "min_gap") {
        *out = c.min_gap;
        return HYPB_OK;
    }
    if (k == "max_gap") {
        *out = c.max_gap;
        return HYPB_OK;
    }
    if (k == "min_jump") {
        *out = c.min_jump;
        return HYPB_OK;
    }
    if (k == "min_u") {
        *out = c.min_u;
        return HYPB_OK;
    }
    if (k == "min_terminal_u") {
        *out = c.min_terminal_u;
        return HYPB_OK;
    }
    if (k == "dropped") {
        *out = c.dropped;
        return HYPB_OK;
    }
    if (k == "intervals_total") {
        *out = static_cast<double>(c.intervals_total);
        return HYPB_OK;
    }
    if (k == "lyapunov_mean" || k == "lyapunov_std_error") {
        if (!c.expansion) return invalid("certificate has no expansion estimate");
        *out = k == "lyapunov_mean" ? c.expansion->mean : c.expansion->std_error;
        return HYPB_OK;
    }
    if (!c.constants) return invalid("certificate has no criterion constants");
    const hypb::CriterionConstants& kk = *c.constants;
    if (k == "A") {
        *out = kk.A;
        return HYPB_OK;
    }
    if (k == "m") {
        *out = kk.m;
        return HYPB_OK;
    }
    if (k == "m_requested") {
        *out = kk.m_requested;
        return HYPB_OK;
    }
    if (k == "c") {
        *out = kk.c;
        return HYPB_OK;
    }
    if (k == "C") {
        *out = kk.C;
        return HYPB_OK;
    }
    if (k == "eta") {
        *out = kk.eta;
        return HYPB_OK;
    }
    if (k == "alpha") {
        *out = kk.alpha;
        return HYPB_OK;
    }
    if (k == "epsilon") {
        *out = kk.epsilon;
        return HYPB_OK;
    }
    if (k == "k_max") {
        *out = kk.k_max;
        return HYPB_OK;
    }
    return invalid("hypb_certificate_value: unknown key");
}

/* ------------------------------------------------------------------ cones */

hypb_status hypb_cone_report_create(const double* matrices, size_t n, double epsilon,
                                    int iterations, hypb_cone_report** out) {
    if (!matrices || !out) return invalid("hypb_cone_report_create: null argument");
    if (n == 0) return invalid("hypb_cone_report_create: empty cocycle");
    return guarded([&] {
        std::vector<hypb::TangentMatrix> ms(n);
        for (size_t i = 0; i < n; ++i) {
            ms[i].a = matrices[4 * i + 0];
            ms[i].b = matrices[4 * i + 1];
            ms[i].c = matrices[4 * i + 2];
            ms[i].d = matrices[4 * i + 3];
            if (std::abs(std::abs(ms[i].det()) - 1.0) > 1e-8)
                hypb::fail(hypb::ErrorCode::invalid_argument,
                           "cocycle matrix " + std::to_string(i) + " has det != +-1");
        }
        auto* rep = new hypb_cone_report;
        rep->bound = hypb::cone_gain_bound(epsilon);
        rep->min_gain = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < n; ++i) {
            bool pass = hypb::cone_map_check(ms[i], epsilon);
            rep->pass_count += pass ? 1 : 0;
            rep->all_pass = rep->all_pass && pass;
            if (pass) {
                // Deterministic fan of cone vectors.
                for (int j = 0; j <= 32; ++j) {
                    double lam = j / 32.0;
                    hypb::Vec2 v{epsilon + lam * (1.0 / epsilon - epsilon), 1.0};
                    rep->min_gain = std::min(rep->min_gain, hypb::expansion_gain(ms[i], v));
                }
            }
        }
        if (!std::isfinite(rep->min_gain)) rep->min_gain = 0.0;
        rep->dirs = hypb::invariant_directions(ms, iterations > 0 ? iterations : 40);

        std::ostringstream txt;
        txt << "hypb.cones.version = 1\n";
        txt << "matrices = " << n << "\n";
        txt << "epsilon = " << epsilon << "\n";
        txt << "all_pass = " << (rep->all_pass ? "true" : "false") << "\n";
        txt << "pass_count = " << rep->pass_count << "\n";
        txt << "gain_bound = " << rep->bound << "\n";
        txt << "min_gain = " << rep->min_gain << "\n";
        txt << "contracting = " << (rep->dirs.contracting ? "true" : "false") << "\n";
        const auto& last = rep->dirs.at_mesh.back();
        txt << "unstable_angle_end = " << last.unstable_angle << "\n";
        txt << "unstable_diameter_end = " << last.unstable_diameter << "\n";
        const auto& first = rep->dirs.at_mesh.front();
        txt << "stable_angle_start = " << first.stable_angle << "\n";
        txt << "stable_diameter_start = " << first.stable_diameter << "\n";
        rep->text = txt.str();
        *out = rep;
    });
}

void hypb_cone_report_free(hypb_cone_report* rep) { delete rep; }

int hypb_cone_all_pass(const hypb_cone_report* rep) { return rep->all_pass ? 1 : 0; }
long hypb_cone_pass_count(const hypb_cone_report* rep) { return rep->pass_count; }
double hypb_cone_min_gain(const hypb_cone_report* rep) { return rep->min_gain; }
double hypb_cone_gain_bound(const hypb_cone_report* rep) { return rep->bound; }
int hypb_cone_contracting(const hypb_cone_report* rep) { return rep->dirs.contracting ? 1 : 0; }

hypb_status hypb_cone_directions(const hypb_cone_report* rep, size_t i, double* unstable_angle,
                                 double* stable_angle, double* unstable_diameter,
                                 double* stable_diameter) {
    if (!rep) return invalid("hypb_cone_directions: null report");
    if (i >= rep->dirs.at_mesh.size()) return invalid("hypb_cone_directions: index out of range");
    const hypb::DirectionEstimate& e = rep->dirs.at_mesh[i];
    if (unstable_angle) *unstable_angle = e.unstable_angle;
    if (stable_angle) *stable_angle = e.stable_angle;
    if (unstable_diameter) *unstable_diameter = e.unstable_diameter;
    if (stable_diameter) *stable_diameter = e.stable_diameter;
    return HYPB_OK;
}

const char* hypb_cone_report_text(const hypb_cone_report* rep) { return rep->text.c_str(); }

}  // extern "C"
