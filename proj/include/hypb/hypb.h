/* hypb - billiard flows and hyperbolicity certification on flat and
 * conformally curved 2-tori.
 *
 * C API of the shared library. All objects are opaque handles created and
 * destroyed by the library; every function returns a hypb_status, with
 * results delivered through out-parameters. On any failure
 * hypb_last_error() carries a diagnostic for the calling thread.
 */

#ifndef HYPB_H
#define HYPB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HYPB_API __declspec(dllexport)
#else
#define HYPB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define HYPB_VERSION_STRING "0.1.0"

typedef enum hypb_status {
    HYPB_OK = 0,
    HYPB_ERR_INVALID_ARGUMENT = 1,
    HYPB_ERR_PARSE = 2,
    HYPB_ERR_DOMAIN = 3,
    HYPB_ERR_GRAZING = 4,
    HYPB_ERR_UNSUPPORTED = 5,
    HYPB_ERR_INTERNAL = 6
} hypb_status;

typedef enum hypb_verdict {
    HYPB_VERDICT_CERTIFIED = 0,
    HYPB_VERDICT_REFUTED = 1,
    HYPB_VERDICT_INCONCLUSIVE = 2
} hypb_verdict;

typedef enum hypb_termination {
    HYPB_TERM_TIME_LIMIT = 0,
    HYPB_TERM_GRAZING = 1,
    HYPB_TERM_ESCAPED = 2
} hypb_termination;

typedef enum hypb_certify_mode {
    HYPB_MODE_THM3 = 0,
    HYPB_MODE_THM1 = 1,
    HYPB_MODE_THM4 = 2,
    HYPB_MODE_SINAI = 3
} hypb_certify_mode;

typedef struct hypb_table hypb_table;
typedef struct hypb_trajectory hypb_trajectory;
typedef struct hypb_riccati_trace hypb_riccati_trace;
typedef struct hypb_lyapunov_result hypb_lyapunov_result;
typedef struct hypb_horizon_result hypb_horizon_result;
typedef struct hypb_certificate hypb_certificate;
typedef struct hypb_cone_report hypb_cone_report;

HYPB_API const char* hypb_version(void);

/* Thread-local message describing the last failure in this thread. */
HYPB_API const char* hypb_last_error(void);

/* ------------------------------------------------------------------ tables */

HYPB_API hypb_status hypb_table_load(const char* path, hypb_table** out);
HYPB_API hypb_status hypb_table_parse(const char* text, const char* name, hypb_table** out);
/* Resolves a built-in scenario name or a filesystem path. */
HYPB_API hypb_status hypb_table_resolve(const char* name_or_path, hypb_table** out);
HYPB_API void hypb_table_free(hypb_table* table);

HYPB_API const char* hypb_table_name(const hypb_table* table);
HYPB_API int hypb_table_is_flat(const hypb_table* table);
HYPB_API size_t hypb_table_wall_count(const hypb_table* table);
HYPB_API hypb_status hypb_table_kmax(const hypb_table* table, double* out);
/* dispersing: 1 = every sampled wall point has kappa < 0 (vacuously 1 without
 * walls, with has_walls = 0). worst_kappa receives the largest sampled value. */
HYPB_API hypb_status hypb_table_is_dispersing(const hypb_table* table, int samples, int* dispersing,
                                              double* worst_kappa, int* has_walls);

/* Built-in scenario catalog. */
HYPB_API size_t hypb_scenario_count(void);
HYPB_API hypb_status hypb_scenario_info(size_t index, const char** name, const char** description);
HYPB_API hypb_status hypb_scenario_definition(const char* name, const char** definition);

/* -------------------------------------------------------------- simulation */

/* Billiard flow from (x0, y0) at chart angle angle0 over the given duration.
 * sample_stride > 0 records dense output rows at that spacing. */
HYPB_API hypb_status hypb_simulate(const hypb_table* table, double x0, double y0, double angle0,
                                   double duration, double sample_stride, hypb_trajectory** out);
HYPB_API void hypb_trajectory_free(hypb_trajectory* traj);

HYPB_API hypb_termination hypb_trajectory_termination(const hypb_trajectory* traj);
HYPB_API double hypb_trajectory_t_end(const hypb_trajectory* traj);
HYPB_API size_t hypb_trajectory_sample_count(const hypb_trajectory* traj);
/* row: t, x, y, vx, vy, event_flag */
HYPB_API hypb_status hypb_trajectory_sample(const hypb_trajectory* traj, size_t i, double row[6]);
HYPB_API size_t hypb_trajectory_collision_count(const hypb_trajectory* traj);
/* row: t, wall_index, r, theta, kappa */
HYPB_API hypb_status hypb_trajectory_collision(const hypb_trajectory* traj, size_t i,
                                               double row[5]);

/* ------------------------------------------------------------------ riccati */

HYPB_API hypb_status hypb_riccati(const hypb_table* table, double x0, double y0, double angle0,
                                  double u0, double duration, double sample_stride,
                                  hypb_riccati_trace** out);
HYPB_API void hypb_riccati_trace_free(hypb_riccati_trace* trace);

HYPB_API size_t hypb_riccati_sample_count(const hypb_riccati_trace* trace);
/* row: t, u, y, ydot, blowup_flag, collision_flag */
HYPB_API hypb_status hypb_riccati_sample(const hypb_riccati_trace* trace, size_t i, double row[6]);
HYPB_API size_t hypb_riccati_blowup_count(const hypb_riccati_trace* trace);
HYPB_API hypb_status hypb_riccati_blowup_time(const hypb_riccati_trace* trace, size_t i,
                                              double* t);

/* ----------------------------------------------------------------- lyapunov */

HYPB_API hypb_status hypb_lyapunov(const hypb_table* table, int ensemble, double duration,
                                   uint64_t seed, int jobs, hypb_lyapunov_result** out);
HYPB_API void hypb_lyapunov_result_free(hypb_lyapunov_result* res);
HYPB_API double hypb_lyapunov_mean(const hypb_lyapunov_result* res);
HYPB_API double hypb_lyapunov_std_error(const hypb_lyapunov_result* res);
HYPB_API int hypb_lyapunov_used(const hypb_lyapunov_result* res);
HYPB_API int hypb_lyapunov_dropped(const hypb_lyapunov_result* res);
HYPB_API hypb_status hypb_lyapunov_exponent(const hypb_lyapunov_result* res, int i, double* out);

/* ------------------------------------------------------------------ horizon */

HYPB_API hypb_status hypb_horizon_probe(const hypb_table* table, int n_directions, int n_origins,
                                        double t_cap, uint64_t seed, int jobs,
                                        hypb_horizon_result** out);
HYPB_API void hypb_horizon_result_free(hypb_horizon_result* res);
HYPB_API double hypb_horizon_max_free_flight(const hypb_horizon_result* res);
HYPB_API long hypb_horizon_total_samples(const hypb_horizon_result* res);
HYPB_API long hypb_horizon_capped_count(const hypb_horizon_result* res);
/* row: x, y, angle of a collision-free (up to t_cap) start */
HYPB_API hypb_status hypb_horizon_capped_sample(const hypb_horizon_result* res, long i,
                                                double row[3]);

/* ------------------------------------------------------------------ certify */

typedef struct hypb_certify_options {
    int ensemble;
    double duration;
    uint64_t seed;
    int jobs;
    double A;
    double m;
    double c; /* thm3: required; sinai: 0 = measure from free paths */
    double C;
    double t0;          /* thm1/thm4 window; 0 = duration */
    double grid_stride; /* thm3 candidate stride; 0 = c/10 */
    int probe_directions;
    int probe_origins;
    double probe_t_cap;
} hypb_certify_options;

HYPB_API void hypb_certify_options_init(hypb_certify_options* opts);

HYPB_API hypb_status hypb_certify(const hypb_table* table, hypb_certify_mode mode,
                                  const hypb_certify_options* opts, hypb_certificate** out);
HYPB_API void hypb_certificate_free(hypb_certificate* cert);

HYPB_API hypb_verdict hypb_certificate_verdict(const hypb_certificate* cert);
HYPB_API const char* hypb_certificate_reason(const hypb_certificate* cert);
HYPB_API const char* hypb_certificate_witness(const hypb_certificate* cert);
/* Structured-text report (owned by the certificate). */
HYPB_API const char* hypb_certificate_report(const hypb_certificate* cert);
/* Constants as named scalars: A, m, m_requested, c, C, eta, alpha, epsilon,
 * k_max, min_gap, max_gap, min_jump, min_u, min_terminal_u, margin,
 * lyapunov_mean, lyapunov_std_error, dropped, intervals_total.
 * Returns HYPB_ERR_INVALID_ARGUMENT for unknown keys or absent sections. */
HYPB_API hypb_status hypb_certificate_value(const hypb_certificate* cert, const char* key,
                                            double* out);

/* -------------------------------------------------------------------- cones */

/* matrices: 4*n doubles, row-major (a, b, c, d) per matrix. Every matrix must
 * have det = +-1 within 1e-8. */
HYPB_API hypb_status hypb_cone_report_create(const double* matrices, size_t n, double epsilon,
                                             int iterations, hypb_cone_report** out);
HYPB_API void hypb_cone_report_free(hypb_cone_report* rep);
HYPB_API int hypb_cone_all_pass(const hypb_cone_report* rep);
HYPB_API long hypb_cone_pass_count(const hypb_cone_report* rep);
HYPB_API double hypb_cone_min_gain(const hypb_cone_report* rep);
HYPB_API double hypb_cone_gain_bound(const hypb_cone_report* rep);
HYPB_API int hypb_cone_contracting(const hypb_cone_report* rep);
/* Direction estimates at mesh point i (0..n): unstable/stable projective
 * angles and angular diameters. */
HYPB_API hypb_status hypb_cone_directions(const hypb_cone_report* rep, size_t i,
                                          double* unstable_angle, double* stable_angle,
                                          double* unstable_diameter, double* stable_diameter);
HYPB_API const char* hypb_cone_report_text(const hypb_cone_report* rep);

#ifdef __cplusplus
}
#endif

#endif /* HYPB_H */
