#include "metric.hpp"

#include <cmath>

namespace hypb {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

MetricField::MetricField(double period_x, double period_y, std::vector<PhiMode> modes,
                         KmaxSettings kmax_settings)
    : period_x_(period_x), period_y_(period_y), modes_(std::move(modes)) {
    if (!(period_x_ > 0.0) || !(period_y_ > 0.0))
        fail(ErrorCode::invalid_argument, "metric periods must be positive");
    flat_ = true;
    for (const auto& m : modes_) {
        if (m.amp_cos != 0.0 || m.amp_sin != 0.0) flat_ = false;
    }
    if (flat_) {
        kmax_ = kmax_raw_ = 0.0;
        return;
    }
    if (kmax_settings.grid < 2) fail(ErrorCode::invalid_argument, "kmax grid must be >= 2");
    double worst = 0.0;
    for (int i = 0; i < kmax_settings.grid; ++i) {
        for (int j = 0; j < kmax_settings.grid; ++j) {
            Vec2 p{period_x_ * i / kmax_settings.grid, period_y_ * j / kmax_settings.grid};
            worst = std::max(worst, std::abs(curvature(p)));
        }
    }
    kmax_raw_ = worst;
    kmax_ = worst * (1.0 + kmax_settings.safety_margin);
}

double MetricField::phi(const Vec2& p) const {
    double s = 0.0;
    for (const auto& m : modes_) {
        double w = kTwoPi * (m.kx * p.x / period_x_ + m.ky * p.y / period_y_);
        s += m.amp_cos * std::cos(w) + m.amp_sin * std::sin(w);
    }
    return s;
}

Vec2 MetricField::grad_phi(const Vec2& p) const {
    Vec2 g{0.0, 0.0};
    for (const auto& m : modes_) {
        double wx = kTwoPi * m.kx / period_x_;
        double wy = kTwoPi * m.ky / period_y_;
        double w = wx * p.x + wy * p.y;
        double d = -m.amp_cos * std::sin(w) + m.amp_sin * std::cos(w);
        g.x += wx * d;
        g.y += wy * d;
    }
    return g;
}

void MetricField::hessian_phi(const Vec2& p, double& pxx, double& pxy, double& pyy) const {
    pxx = pxy = pyy = 0.0;
    for (const auto& m : modes_) {
        double wx = kTwoPi * m.kx / period_x_;
        double wy = kTwoPi * m.ky / period_y_;
        double w = wx * p.x + wy * p.y;
        double d2 = -m.amp_cos * std::cos(w) - m.amp_sin * std::sin(w);
        pxx += wx * wx * d2;
        pxy += wx * wy * d2;
        pyy += wy * wy * d2;
    }
}

double MetricField::laplacian_phi(const Vec2& p) const {
    double pxx, pxy, pyy;
    hessian_phi(p, pxx, pxy, pyy);
    return pxx + pyy;
}

double MetricField::curvature(const Vec2& p) const {
    if (flat_) return 0.0;
    return -std::exp(-2.0 * phi(p)) * laplacian_phi(p);
}

double MetricField::inner(const Vec2& p, const Vec2& a, const Vec2& b) const {
    if (flat_) return dot(a, b);
    return std::exp(2.0 * phi(p)) * dot(a, b);
}

double MetricField::speed(const Vec2& p, const Vec2& v) const {
    if (flat_) return norm(v);
    return std::exp(phi(p)) * norm(v);
}

Vec2 MetricField::unit(const Vec2& p, const Vec2& v) const {
    double s = speed(p, v);
    if (s == 0.0) fail(ErrorCode::invalid_argument, "cannot normalize a zero vector");
    return v * (1.0 / s);
}

Vec2 MetricField::wrap(const Vec2& p) const {
    double x = std::fmod(p.x, period_x_);
    double y = std::fmod(p.y, period_y_);
    if (x < 0.0) x += period_x_;
    if (y < 0.0) y += period_y_;
    // fmod can return the period itself after the adjustment when the input
    // is a tiny negative number.
    if (x >= period_x_) x -= period_x_;
    if (y >= period_y_) y -= period_y_;
    return {x, y};
}

Vec2 MetricField::geodesic_accel(const Vec2& p, const Vec2& v) const {
    if (flat_) return {0.0, 0.0};
    Vec2 g = grad_phi(p);
    double vv = v.x * v.x - v.y * v.y;
    return {-g.x * vv - 2.0 * g.y * v.x * v.y, g.y * vv - 2.0 * g.x * v.x * v.y};
}

}  // namespace hypb
