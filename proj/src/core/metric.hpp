#pragma once

#include <vector>

#include "error.hpp"
#include "vec.hpp"

namespace hypb {

// One Fourier mode of the conformal factor: amp_cos*cos(w) + amp_sin*sin(w)
// with w = 2*pi*(kx*x/period_x + ky*y/period_y).
struct PhiMode {
    int kx = 0;
    int ky = 0;
    double amp_cos = 0.0;
    double amp_sin = 0.0;
};

// Grid estimation settings for the cached max |K|.
struct KmaxSettings {
    int grid = 512;
    double safety_margin = 0.10;
};

// Conformal metric e^{2 phi} * (dx^2 + dy^2) on the torus
// [0, period_x) x [0, period_y), with phi a finite trigonometric sum. The
// finite sum makes phi and its derivatives exact and exactly periodic, so the
// Gaussian curvature K = -e^{-2 phi} * Lap(phi) carries no interpolation
// error.
class MetricField {
public:
    MetricField(double period_x, double period_y, std::vector<PhiMode> modes = {},
                KmaxSettings kmax_settings = KmaxSettings{});

    double period_x() const { return period_x_; }
    double period_y() const { return period_y_; }
    const std::vector<PhiMode>& modes() const { return modes_; }

    // True iff phi is identically zero (every amplitude vanishes). Constant
    // nonzero phi does not count: geodesics are still straight lines there,
    // but unit vectors are not Euclidean-unit, so the exact flat fast paths
    // would be wrong.
    bool is_flat() const { return flat_; }

    double phi(const Vec2& p) const;
    Vec2 grad_phi(const Vec2& p) const;
    // (phi_xx, phi_xy, phi_yy)
    void hessian_phi(const Vec2& p, double& pxx, double& pxy, double& pyy) const;
    double laplacian_phi(const Vec2& p) const;

    // Gaussian curvature at p.
    double curvature(const Vec2& p) const;

    // Grid-estimated max |K| over the chart, with the configured safety
    // margin applied. Cached at construction.
    double kmax() const { return kmax_; }
    double kmax_raw() const { return kmax_raw_; }

    // Metric inner product of tangent vectors at p.
    double inner(const Vec2& p, const Vec2& a, const Vec2& b) const;
    double speed(const Vec2& p, const Vec2& v) const;
    // Rescales v to unit metric speed at p.
    Vec2 unit(const Vec2& p, const Vec2& v) const;

    // Representative coordinates in [0, period_x) x [0, period_y).
    Vec2 wrap(const Vec2& p) const;

    // Geodesic equation right-hand side: given (p, v) returns dv/dt. Plain
    // Christoffel symbols of the conformal metric.
    Vec2 geodesic_accel(const Vec2& p, const Vec2& v) const;

private:
    double period_x_;
    double period_y_;
    std::vector<PhiMode> modes_;
    bool flat_;
    double kmax_ = 0.0;
    double kmax_raw_ = 0.0;
};

}  // namespace hypb
