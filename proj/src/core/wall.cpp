#include "wall.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace hypb {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// 5-point Gauss-Legendre on [0, 1].
constexpr double kGaussNode[5] = {0.046910077030668, 0.230765344947158, 0.5,
                                  0.769234655052842, 0.953089922969332};
constexpr double kGaussWeight[5] = {0.118463442528095, 0.239314335249683, 0.284444444444444,
                                    0.239314335249683, 0.118463442528095};

// Periodic tridiagonal system (1, 4, 1) via Sherman-Morrison.
std::vector<double> solve_cyclic_141(const std::vector<double>& rhs) {
    int n = static_cast<int>(rhs.size());
    auto thomas = [n](std::vector<double> b, std::vector<double> d) {
        std::vector<double> c(n, 1.0);
        for (int i = 1; i < n; ++i) {
            double w = 1.0 / b[i - 1];
            b[i] -= w * c[i - 1];
            d[i] -= w * d[i - 1];
        }
        std::vector<double> x(n);
        x[n - 1] = d[n - 1] / b[n - 1];
        for (int i = n - 2; i >= 0; --i) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
        return x;
    };
    // A = tri(1,4,1) with corners; write A = B + u v^T, gamma = -4.
    double gamma = -4.0;
    std::vector<double> b(n, 4.0);
    b[0] -= gamma;
    b[n - 1] -= 1.0 / gamma;
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = 1.0;
    std::vector<double> y = thomas(b, rhs);
    std::vector<double> z = thomas(b, u);
    double vy = y[0] + y[n - 1] / gamma;
    double vz = z[0] + z[n - 1] / gamma;
    double factor = vy / (1.0 + vz);
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = y[i] - factor * z[i];
    return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// CircleWall

CircleWall::CircleWall(std::shared_ptr<const MetricField> metric, Vec2 center, double radius)
    : Wall(std::move(metric)), center_(center), radius_(radius) {
    if (!metric_->is_flat())
        fail(ErrorCode::invalid_argument,
             "circle walls are only supported on flat metrics; use a spline wall");
    if (!(radius_ > 0.0)) fail(ErrorCode::invalid_argument, "circle radius must be positive");
    if (2.0 * radius_ >= std::min(metric_->period_x(), metric_->period_y()))
        fail(ErrorCode::invalid_argument, "circle diameter exceeds a torus period");
}

double CircleWall::length() const { return kTwoPi * radius_; }

// Counterclockwise parametrization: with N the outward radial direction
// (toward the billiard interior), kappa = <dT/dr, N> = -1/R.
Vec2 CircleWall::position(double r) const {
    double a = r / radius_;
    return center_ + Vec2{radius_ * std::cos(a), radius_ * std::sin(a)};
}

WallFrame CircleWall::frame(double r) const {
    double a = r / radius_;
    double c = std::cos(a), s = std::sin(a);
    WallFrame f;
    f.point = center_ + Vec2{radius_ * c, radius_ * s};
    f.tangent = {-s, c};
    f.normal = {c, s};
    f.kappa = -1.0 / radius_;
    return f;
}

double CircleWall::signed_distance_raw(const Vec2& p) const { return norm(p - center_) - radius_; }

double CircleWall::proxy_raw(const Vec2& p) const { return norm2(p - center_) - radius_ * radius_; }

double CircleWall::project(const Vec2& p) const {
    Vec2 d = p - center_;
    double a = std::atan2(d.y, d.x);
    if (a < 0.0) a += kTwoPi;
    return a * radius_;
}

// ---------------------------------------------------------------------------
// SplineWall

SplineWall::SplineWall(std::shared_ptr<const MetricField> metric, std::vector<Vec2> points)
    : Wall(std::move(metric)), points_(std::move(points)) {
    int n = static_cast<int>(points_.size());
    if (n < 8) fail(ErrorCode::invalid_argument, "spline walls need at least 8 points");

    std::vector<double> rx(n), ry(n);
    for (int i = 0; i < n; ++i) {
        const Vec2& prev = points_[(i + n - 1) % n];
        const Vec2& next = points_[(i + 1) % n];
        rx[i] = 6.0 * (prev.x - 2.0 * points_[i].x + next.x);
        ry[i] = 6.0 * (prev.y - 2.0 * points_[i].y + next.y);
    }
    m2x_ = solve_cyclic_141(rx);
    m2y_ = solve_cyclic_141(ry);

    // Orientation from the shoelace signed area.
    double area2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vec2& a = points_[i];
        const Vec2& b = points_[(i + 1) % n];
        area2 += a.x * b.y - b.x * a.y;
    }
    ccw_ = area2 > 0.0;

    // Cumulative metric arc length on the fine grid.
    cum_fine_.assign(n * kArcSub + 1, 0.0);
    for (int k = 0; k < n * kArcSub; ++k) {
        double a = static_cast<double>(k) / kArcSub;
        double b = static_cast<double>(k + 1) / kArcSub;
        cum_fine_[k + 1] = cum_fine_[k] + gauss5_speed(a, b);
    }
    total_length_ = cum_fine_.back();
    if (!(total_length_ > 0.0)) fail(ErrorCode::invalid_argument, "degenerate spline wall");

    // Dense samples seed nearest-point projection.
    int dense_n = 16 * n;
    dense_.reserve(dense_n);
    Vec2 lo = points_[0], hi = points_[0];
    for (int i = 0; i < dense_n; ++i) {
        double t = static_cast<double>(i) * n / dense_n;
        Vec2 p = eval(t);
        dense_.push_back({t, p});
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
    bounding_center_ = (lo + hi) * 0.5;
    bounding_radius_ = 0.0;
    for (const auto& s : dense_)
        bounding_radius_ = std::max(bounding_radius_, norm(s.p - bounding_center_));
    bounding_radius_ += 1e-3 * total_length_;
}

Vec2 SplineWall::eval(double t) const {
    int n = static_cast<int>(points_.size());
    t = std::fmod(t, static_cast<double>(n));
    if (t < 0.0) t += n;
    int i = std::min(static_cast<int>(t), n - 1);
    double s = t - i;
    int j = (i + 1) % n;
    double a = 1.0 - s;
    double cx = points_[i].x * a + points_[j].x * s + (a * a * a - a) * m2x_[i] / 6.0 +
                (s * s * s - s) * m2x_[j] / 6.0;
    double cy = points_[i].y * a + points_[j].y * s + (a * a * a - a) * m2y_[i] / 6.0 +
                (s * s * s - s) * m2y_[j] / 6.0;
    return {cx, cy};
}

Vec2 SplineWall::eval_d1(double t) const {
    int n = static_cast<int>(points_.size());
    t = std::fmod(t, static_cast<double>(n));
    if (t < 0.0) t += n;
    int i = std::min(static_cast<int>(t), n - 1);
    double s = t - i;
    int j = (i + 1) % n;
    double a = 1.0 - s;
    double dx = points_[j].x - points_[i].x + (1.0 - 3.0 * a * a) * m2x_[i] / 6.0 +
                (3.0 * s * s - 1.0) * m2x_[j] / 6.0;
    double dy = points_[j].y - points_[i].y + (1.0 - 3.0 * a * a) * m2y_[i] / 6.0 +
                (3.0 * s * s - 1.0) * m2y_[j] / 6.0;
    return {dx, dy};
}

Vec2 SplineWall::eval_d2(double t) const {
    int n = static_cast<int>(points_.size());
    t = std::fmod(t, static_cast<double>(n));
    if (t < 0.0) t += n;
    int i = std::min(static_cast<int>(t), n - 1);
    double s = t - i;
    int j = (i + 1) % n;
    return {(1.0 - s) * m2x_[i] + s * m2x_[j], (1.0 - s) * m2y_[i] + s * m2y_[j]};
}

double SplineWall::speed_chart(double t) const {
    Vec2 d = eval_d1(t);
    return std::exp(metric_->phi(eval(t))) * norm(d);
}

double SplineWall::gauss5_speed(double a, double b) const {
    double w = b - a;
    double total = 0.0;
    for (int k = 0; k < 5; ++k) total += w * kGaussWeight[k] * speed_chart(a + w * kGaussNode[k]);
    return total;
}

double SplineWall::arc_length_to(double t) const {
    int n = static_cast<int>(points_.size());
    double wraps = std::floor(t / n);
    t -= wraps * n;
    int k = std::min(static_cast<int>(t * kArcSub), n * kArcSub - 1);
    double a = static_cast<double>(k) / kArcSub;
    double s = cum_fine_[k];
    if (t > a) s += gauss5_speed(a, t);
    return s + wraps * total_length_;
}

double SplineWall::param_at_arc(double r) const {
    int n = static_cast<int>(points_.size());
    double wraps = std::floor(r / total_length_);
    r -= wraps * total_length_;
    int fine_n = n * kArcSub;
    int lo = 0, hi = fine_n;
    while (hi - lo > 1) {
        int mid = (lo + hi) / 2;
        if (cum_fine_[mid] <= r)
            lo = mid;
        else
            hi = mid;
    }
    // Newton on arc_length_to(t) - r, bracketed in the fine cell.
    double cell = 1.0 / kArcSub;
    double t = (lo + (r - cum_fine_[lo]) / (cum_fine_[lo + 1] - cum_fine_[lo])) * cell;
    double tlo = lo * cell, thi = (lo + 1.0) * cell;
    for (int it = 0; it < 60; ++it) {
        double f = arc_length_to(t) - r;
        if (f > 0.0)
            thi = t;
        else
            tlo = t;
        double d = speed_chart(t);
        double step = f / d;
        double tn = t - step;
        if (!(tn > tlo) || !(tn < thi)) tn = 0.5 * (tlo + thi);
        if (std::abs(tn - t) < 1e-14 * n) {
            t = tn;
            break;
        }
        t = tn;
    }
    return t + wraps * n;
}

Vec2 SplineWall::position(double r) const { return eval(param_at_arc(r)); }

WallFrame SplineWall::frame_at_param(double t) const {
    WallFrame f;
    f.point = eval(t);
    Vec2 d = eval_d1(t);
    double nn = norm(d);
    double ephi = std::exp(metric_->phi(f.point));
    Vec2 tdir{d.x / nn, d.y / nn};
    // Unit in the metric.
    f.tangent = tdir * (1.0 / ephi);
    Vec2 ndir = perp(tdir);
    // For a counterclockwise obstacle boundary perp(T) points into the
    // obstacle, so flip to get the billiard-interior normal.
    if (ccw_) ndir = -ndir;
    f.normal = ndir * (1.0 / ephi);
    f.kappa = 0.0;
    return f;
}

WallFrame SplineWall::frame(double r) const {
    double t = param_at_arc(r);
    WallFrame f = frame_at_param(t);

    // kappa = g(nabla_T T, N): central finite difference of T along arc
    // length plus the Christoffel term of the conformal metric.
    double h = 1e-5 * total_length_;
    WallFrame fp = frame_at_param(param_at_arc(r + h));
    WallFrame fm = frame_at_param(param_at_arc(r - h));
    Vec2 dT{(fp.tangent.x - fm.tangent.x) / (2.0 * h), (fp.tangent.y - fm.tangent.y) / (2.0 * h)};
    Vec2 g = metric_->grad_phi(f.point);
    const Vec2& T = f.tangent;
    Vec2 gamma{g.x * T.x * T.x + 2.0 * g.y * T.x * T.y - g.x * T.y * T.y,
               -g.y * T.x * T.x + 2.0 * g.x * T.x * T.y + g.y * T.y * T.y};
    Vec2 cov = dT + gamma;
    f.kappa = metric_->inner(f.point, cov, f.normal);
    return f;
}

double SplineWall::project_param(const Vec2& p) const {
    // Nearest dense sample, then Newton on (q(t) - p) . q'(t) = 0.
    double best = 1e300;
    double tbest = 0.0;
    for (const auto& s : dense_) {
        double d2 = norm2(s.p - p);
        if (d2 < best) {
            best = d2;
            tbest = s.t;
        }
    }
    double t = tbest;
    for (int it = 0; it < 8; ++it) {
        Vec2 q = eval(t), d1 = eval_d1(t), d2 = eval_d2(t);
        Vec2 e = q - p;
        double f = dot(e, d1);
        double fp = dot(d1, d1) + dot(e, d2);
        if (fp == 0.0) break;
        double step = f / fp;
        t -= step;
        if (std::abs(step) < 1e-14) break;
    }
    return t;
}

double SplineWall::signed_distance_raw(const Vec2& p) const {
    double t = project_param(p);
    Vec2 q = eval(t);
    double dist = norm(p - q);
    WallFrame f = frame_at_param(t);
    double side = dot(p - q, f.normal);
    return side >= 0.0 ? dist : -dist;
}

double SplineWall::project(const Vec2& p) const {
    int n = static_cast<int>(points_.size());
    double t = project_param(p);
    t = std::fmod(t, static_cast<double>(n));
    if (t < 0.0) t += n;
    return arc_length_to(t);
}

}  // namespace hypb
