#pragma once

// Test-only oracles, independent of the propagation paths they check:
// closed-form constant-curvature Jacobi/Riccati solutions, dense-sampling
// collision search, and finite-difference helpers.

#include <cmath>
#include <optional>
#include <random>

#include "core/dynamics.hpp"
#include "core/table.hpp"

namespace oracle {

// Exact solution of y'' = -K y with constant K over time t.
struct JacobiClosedForm {
    double y;
    double ydot;
};

inline JacobiClosedForm jacobi_constant_k(double k, double y0, double yd0, double t) {
    if (k == 0.0) return {y0 + t * yd0, yd0};
    if (k < 0.0) {
        double w = std::sqrt(-k);
        return {y0 * std::cosh(w * t) + yd0 / w * std::sinh(w * t),
                y0 * w * std::sinh(w * t) + yd0 * std::cosh(w * t)};
    }
    double w = std::sqrt(k);
    return {y0 * std::cos(w * t) + yd0 / w * std::sin(w * t),
            -y0 * w * std::sin(w * t) + yd0 * std::cos(w * t)};
}

// Riccati solution u' = -K - u^2 with constant K, through the linear system
// (blow-up reported as nullopt).
inline std::optional<double> riccati_constant_k(double k, double u0, double t) {
    JacobiClosedForm f = jacobi_constant_k(k, 1.0, u0, t);
    if (f.y == 0.0) return std::nullopt;
    return f.ydot / f.y;
}

// First zero of y(t) for y(0) = 1, ydot(0) = u0 under constant K (the
// Riccati blow-up time), if any.
inline std::optional<double> first_zero_constant_k(double k, double u0, double t_max) {
    // March with a fine stride and bisect the sign change of the closed form.
    double prev = 1.0;
    double stride = 1e-4;
    for (double t = stride; t <= t_max + stride; t += stride) {
        double y = jacobi_constant_k(k, 1.0, u0, t).y;
        if ((prev > 0.0) != (y > 0.0)) {
            double lo = t - stride, hi = t;
            for (int i = 0; i < 80; ++i) {
                double mid = 0.5 * (lo + hi);
                double ym = jacobi_constant_k(k, 1.0, u0, mid).y;
                if ((ym > 0.0) == (prev > 0.0))
                    lo = mid;
                else
                    hi = mid;
            }
            return 0.5 * (lo + hi);
        }
        prev = y;
    }
    return std::nullopt;
}

// Brute-force first collision time by dense sampling of the signed distance
// along the exactly-advanced flat ray, refined by bisection.
inline std::optional<double> dense_first_collision(const hypb::BilliardTable& table,
                                                   hypb::Vec2 pos, hypb::Vec2 vel, double t_max,
                                                   double stride = 1e-4) {
    const hypb::MetricField& metric = table.metric();
    double prev = table.signed_distance(pos);
    for (double t = stride; t <= t_max; t += stride) {
        hypb::Vec2 p = metric.wrap(pos + t * vel);
        double d = table.signed_distance(p);
        if (prev > 0.0 && d <= 0.0) {
            double lo = t - stride, hi = t;
            for (int i = 0; i < 80; ++i) {
                double mid = 0.5 * (lo + hi);
                double dm = table.signed_distance(metric.wrap(pos + mid * vel));
                if (dm > 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
            return 0.5 * (lo + hi);
        }
        if (d > 0.0) prev = d;
    }
    return std::nullopt;
}

// Central finite-difference Laplacian of the conformal factor.
inline double fd_laplacian_phi(const hypb::MetricField& m, hypb::Vec2 p, double h) {
    double c = m.phi(p);
    double xp = m.phi({p.x + h, p.y}), xm = m.phi({p.x - h, p.y});
    double yp = m.phi({p.x, p.y + h}), ym = m.phi({p.x, p.y - h});
    return (xp + xm + yp + ym - 4.0 * c) / (h * h);
}

// Deterministic test RNG (fixed-seed mt19937_64 with explicit double mapping).
class TestRng {
public:
    explicit TestRng(std::uint64_t seed) : eng_(seed) {}
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(eng_() >> 11) * 0x1.0p-53);
    }
    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

inline const char* two_disk_table_text() {
    return "name = sinai-two-disk\n"
           "metric.period_x = 1.0\nmetric.period_y = 1.0\n"
           "walls = [{type=circle, center=(0.0, 0.0), radius=0.3},\n"
           "         {type=circle, center=(0.5, 0.5), radius=0.3}]\n";
}

// Finite-horizon variant: blocks the axis corridors (r1 + r2 > 1/2) and the
// diagonal corridors (max radius > sqrt(2)/4).
inline const char* finite_horizon_table_text() {
    return "name = sinai-two-disk-fh\n"
           "metric.period_x = 1.0\nmetric.period_y = 1.0\n"
           "walls = [{type=circle, center=(0.0, 0.0), radius=0.4},\n"
           "         {type=circle, center=(0.5, 0.5), radius=0.2}]\n";
}

inline const char* one_disk_table_text() {
    return "name = sinai-one-disk\n"
           "metric.period_x = 1.0\nmetric.period_y = 1.0\n"
           "walls = [{type=circle, center=(0.5, 0.5), radius=0.3}]\n";
}

inline const char* flat_empty_table_text() {
    return "name = flat-empty\nmetric.period_x = 1.0\nmetric.period_y = 1.0\n";
}

}  // namespace oracle
