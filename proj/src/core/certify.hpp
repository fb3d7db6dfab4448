#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cones.hpp"
#include "dynamics.hpp"
#include "tangent.hpp"

namespace hypb {

// Constants of the time-sequence Riccati criterion with the derived
// quantities eta, alpha and the cone parameter epsilon. Construction enforces
// A >= 2, c < C, positivity, and clips m to min(e^{-4AC}, 1/4).
struct CriterionConstants {
    double A = 2.0;
    double m = 0.0;
    double c = 0.0;
    double C = 0.0;
    double k_max = 0.0;
    double eta = 0.0;
    double alpha = 0.0;
    double epsilon = 0.0;
    double m_requested = 0.0;
    bool m_clipped = false;

    static CriterionConstants make(double A, double m, double c, double C, double k_max);
};

enum class Verdict { certified, refuted, inconclusive };
const char* verdict_name(Verdict v);

struct IntervalSummary {
    double t_start = 0.0;
    double t_end = 0.0;
    int collisions = 0;
    double min_u = 0.0;
    double terminal_u = 0.0;  // u(t_{k+1}^+)
};

enum class TrajectoryOutcome { completed, refuted, stalled, dropped_grazing, dropped_escaped };

struct TrajectoryReport {
    int index = 0;
    PhasePoint start;
    TrajectoryOutcome outcome = TrajectoryOutcome::completed;
    int collisions = 0;
    double min_gap = 0.0;
    double max_gap = 0.0;
    double min_jump = 0.0;      // smallest post-collision u jump observed
    double min_u = 0.0;         // over all intervals
    double min_terminal_u = 0.0;
    int intervals = 0;
    std::string note;
};

struct HyperbolicityEstimate {
    std::vector<double> per_trajectory;   // lyapunov exponent estimates
    double mean = 0.0;
    double std_error = 0.0;
    int used = 0;
    int dropped = 0;
    std::vector<double> unstable_angles;  // projective direction samples (y, ydot)
};

struct Certificate {
    std::string mode;   // thm3 | thm1 | thm4 | sinai
    std::string table;
    Verdict verdict = Verdict::inconclusive;
    std::string reason;   // e.g. infinite-horizon-candidate
    std::string witness;  // failure data, empty when certified
    std::optional<CriterionConstants> constants;
    int ensemble = 0;
    double duration = 0.0;
    std::uint64_t seed = 0;
    int dropped = 0;
    double window_start = 0.0;  // finite-window truncation of the bi-infinite sequence
    double min_gap = 0.0;
    double max_gap = 0.0;
    double min_jump = 0.0;
    double min_u = 0.0;
    double min_terminal_u = 0.0;
    long intervals_total = 0;
    double margin = 0.0;  // thm1: min terminal u; thm4: worst curvature integral
    std::optional<HyperbolicityEstimate> expansion;
    std::vector<TrajectoryReport> trajectories;
};

struct CertifyOptions {
    int ensemble = 100;
    double duration = 1000.0;
    std::uint64_t seed = 1;
    int jobs = 0;
    double A = 2.0;
    double m = 0.01;
    double c = 0.0;  // thm3: required; sinai: measured when 0
    double C = 0.0;
    double t0 = 0.0;          // thm1/thm4 window; defaults to duration
    double grid_stride = 0.0;  // thm3 candidate stride; 0 selects c/10
    std::optional<double> constant_curvature;  // test harness
    double tangent_step = 1e-3;
    FlowParams flow;
    int probe_directions = 720;
    int probe_origins = 50;
    double probe_t_cap = 50.0;
};

// Seeded uniform ensemble over position x direction, rejecting starts inside
// obstacles or within 1e-6 of a wall.
std::vector<PhasePoint> sample_ensemble(const BilliardTable& table, int n, std::uint64_t seed);

struct LyapunovOptions {
    int ensemble = 100;
    double duration = 1000.0;
    std::uint64_t seed = 1;
    int jobs = 0;
    double renorm_interval = 1.0;
    std::optional<double> constant_curvature;
    double tangent_step = 1e-3;
    FlowParams flow;
};

// Norm-growth Lyapunov estimator with periodic renormalization. Grazing- or
// escape-terminated trajectories are dropped and counted.
HyperbolicityEstimate lyapunov_estimate(const BilliardTable& table, const LyapunovOptions& opts);

// Theorem-3 style certification with a greedy earliest-feasible construction
// of the time sequence. A stalled scan yields "inconclusive"; "refuted" is
// reserved for intervals where the u >= -A clause fails for every admissible
// candidate.
Certificate certify_theorem3(const BilliardTable& table, const CertifyOptions& opts);

// Geodesic-flow criterion: u(0) = 0 solutions must stay defined on [0, t0]
// and end positive on every sampled geodesic. Requires a wall-free table.
Certificate certify_theorem1(const BilliardTable& table, const CertifyOptions& opts);

// Nonpositive-curvature hypothesis checker: K <= 0 on a dense grid and
// int_0^t0 K(gamma(t)) dt <= -m along every sampled geodesic.
Certificate check_theorem4_hypothesis(const BilliardTable& table, const CertifyOptions& opts);

// Sinai specialization: flat dispersing table, finite horizon probed first,
// t_k = collision times, c and C measured from free paths, m = -2 kappa_max
// clipped to the criterion bound.
Certificate certify_sinai(const BilliardTable& table, const CertifyOptions& opts);

// Re-checks a certificate's stored interval data against a smaller margin m'.
bool revalidate_margin(const Certificate& cert, double m_prime);

// Human-readable structured-text report with a stable key set.
std::string render_report(const Certificate& cert);

}  // namespace hypb
