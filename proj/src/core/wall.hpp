#pragma once

#include <memory>
#include <vector>

#include "metric.hpp"
#include "vec.hpp"

namespace hypb {

// Frame data at a boundary point: unit tangent T, unit inward normal N (both
// unit in the metric, N pointing toward the billiard interior) and geodesic
// curvature kappa = g(nabla_T T, N). Dispersing walls have kappa < 0.
struct WallFrame {
    Vec2 point;
    Vec2 tangent;
    Vec2 normal;
    double kappa = 0.0;
};

// Closed boundary curve parametrized by metric arc length r in [0, length).
class Wall {
public:
    virtual ~Wall() = default;

    virtual double length() const = 0;
    virtual Vec2 position(double r) const = 0;
    virtual WallFrame frame(double r) const = 0;

    // Chart-space signed distance to this wall (no periodic copies): positive
    // on the billiard side, negative inside the obstacle.
    virtual double signed_distance_raw(const Vec2& p) const = 0;

    // Cheap function with the same sign and zero set as signed_distance_raw,
    // used in the per-step collision scan.
    virtual double proxy_raw(const Vec2& p) const { return signed_distance_raw(p); }

    // Arc-length parameter of the point on the wall nearest to p.
    virtual double project(const Vec2& p) const = 0;

    virtual Vec2 bounding_center() const = 0;
    virtual double bounding_radius() const = 0;

    virtual bool is_circle() const { return false; }

    const MetricField& metric() const { return *metric_; }

protected:
    explicit Wall(std::shared_ptr<const MetricField> metric) : metric_(std::move(metric)) {}
    std::shared_ptr<const MetricField> metric_;
};

// Analytic circle obstacle; requires a flat metric, where the closed-form
// frame and kappa = -1/R are exact.
class CircleWall final : public Wall {
public:
    CircleWall(std::shared_ptr<const MetricField> metric, Vec2 center, double radius);

    double length() const override;
    Vec2 position(double r) const override;
    WallFrame frame(double r) const override;
    double signed_distance_raw(const Vec2& p) const override;
    double proxy_raw(const Vec2& p) const override;
    double project(const Vec2& p) const override;
    Vec2 bounding_center() const override { return center_; }
    double bounding_radius() const override { return radius_; }
    bool is_circle() const override { return true; }

    Vec2 center() const { return center_; }
    double radius() const { return radius_; }

private:
    Vec2 center_;
    double radius_;
};

// Closed periodic cubic spline through sample points, reparametrized by
// metric arc length. Used for obstacles in curved metrics, where no analytic
// unit-speed parametrization exists; kappa comes from finite differences of
// the frame plus the Christoffel correction.
class SplineWall final : public Wall {
public:
    SplineWall(std::shared_ptr<const MetricField> metric, std::vector<Vec2> points);

    double length() const override { return total_length_; }
    Vec2 position(double r) const override;
    WallFrame frame(double r) const override;
    double signed_distance_raw(const Vec2& p) const override;
    double project(const Vec2& p) const override;
    Vec2 bounding_center() const override { return bounding_center_; }
    double bounding_radius() const override { return bounding_radius_; }

    int point_count() const { return static_cast<int>(points_.size()); }
    const std::vector<Vec2>& points() const { return points_; }
    bool counterclockwise() const { return ccw_; }

private:
    Vec2 eval(double t) const;
    Vec2 eval_d1(double t) const;
    Vec2 eval_d2(double t) const;
    double speed_chart(double t) const;  // e^phi |p'(t)|
    double gauss5_speed(double a, double b) const;
    double arc_length_to(double t) const;
    double param_at_arc(double r) const;  // inverse of arc_length_to
    double project_param(const Vec2& p) const;  // spline parameter t
    WallFrame frame_at_param(double t) const;   // without kappa

    std::vector<Vec2> points_;
    std::vector<double> m2x_;  // spline second derivatives
    std::vector<double> m2y_;
    // Cumulative arc length on a fine sub-knot grid. Partial integrals are
    // always taken from the nearest grid node so that nearby arc-length
    // evaluations share a consistent quadrature partition.
    static constexpr int kArcSub = 8;
    std::vector<double> cum_fine_;
    double total_length_ = 0.0;
    bool ccw_ = true;
    Vec2 bounding_center_;
    double bounding_radius_ = 0.0;

    struct DenseSample {
        double t;
        Vec2 p;
    };
    std::vector<DenseSample> dense_;  // projection seeds
};

}  // namespace hypb
