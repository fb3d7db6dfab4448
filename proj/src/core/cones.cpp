#include "cones.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace hypb {

namespace {
constexpr double kPi = 3.14159265358979323846264338327950;

// Canonical representative of a projective ray: upper half plane, unit norm.
Vec2 normalize_ray(Vec2 v) {
    if (v.y < 0.0 || (v.y == 0.0 && v.x < 0.0)) v = -v;
    double n = norm(v);
    if (n == 0.0) fail(ErrorCode::internal, "zero ray");
    return v * (1.0 / n);
}

Vec2 apply(const TangentMatrix& m, const Vec2& v) {
    return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
}

Vec2 apply_inverse_ray(const TangentMatrix& m, const Vec2& v) {
    // Adjugate is enough projectively (det is a scalar).
    return {m.d * v.x - m.b * v.y, -m.c * v.x + m.a * v.y};
}

}  // namespace

ConeParams::ConeParams(double eps) : epsilon(eps) {
    if (!(eps > 0.0) || !(eps < 1.0))
        fail(ErrorCode::invalid_argument, "cone parameter must satisfy 0 < epsilon < 1");
}

bool cone_contains(double epsilon, const Vec2& v) {
    Vec2 w = v;
    if (w.y < 0.0 || (w.y == 0.0 && w.x < 0.0)) w = -w;  // projective
    return w.y >= 0.0 && epsilon * w.y <= w.x && w.x <= w.y / epsilon;
}

bool cone_map_check(const TangentMatrix& m, double epsilon) {
    ConeParams check(epsilon);
    (void)check;
    double det = m.det();
    if (std::abs(std::abs(det) - 1.0) > 1e-8)
        fail(ErrorCode::invalid_argument, "cone_map_check requires det = +-1");
    // Row swap normalizes det to +1 and leaves C_eps invariant.
    double a = m.a, b = m.b, c = m.c, d = m.d;
    if (det < 0.0) {
        std::swap(a, c);
        std::swap(b, d);
    }
    auto columns_in_cone = [&](double sgn) {
        Vec2 col1{sgn * a, sgn * c};
        Vec2 col2{sgn * b, sgn * d};
        auto inside = [&](const Vec2& v) {
            return v.y >= 0.0 && epsilon * v.y <= v.x && v.x <= v.y / epsilon;
        };
        return inside(col1) && inside(col2);
    };
    return columns_in_cone(1.0) || columns_in_cone(-1.0);
}

double expansion_gain(const TangentMatrix& m, const Vec2& v) {
    double q = v.x * v.y;
    if (!(q > 0.0))
        fail(ErrorCode::invalid_argument, "expansion_gain needs a vector with xy > 0");
    Vec2 w = apply(m, v);
    return (w.x * w.y) / q;
}

double cone_gain_bound(double epsilon) {
    ConeParams check(epsilon);
    (void)check;
    return 1.0 / (1.0 - epsilon * epsilon);
}

double projective_angle(const Vec2& v) {
    Vec2 w = normalize_ray(v);
    double a = std::atan2(w.y, w.x);
    if (a < 0.0) a += kPi;
    if (a >= kPi) a -= kPi;
    return a;
}

double projective_distance(double a, double b) {
    double d = std::abs(a - b);
    if (d > 0.5 * kPi) d = kPi - d;
    return d;
}

InvariantDirections invariant_directions(const std::vector<TangentMatrix>& cocycle,
                                         int iterations) {
    if (cocycle.empty()) fail(ErrorCode::invalid_argument, "invariant_directions: empty cocycle");
    if (iterations < 1) fail(ErrorCode::invalid_argument, "invariant_directions: iterations >= 1");
    int n = static_cast<int>(cocycle.size());

    InvariantDirections out;
    out.at_mesh.resize(n + 1);

    auto chain_forward = [&](int k, int depth, std::vector<double>* diameters) {
        Vec2 r1{1.0, 0.0}, r2{0.0, 1.0};
        for (int j = k - depth; j < k; ++j) {
            r1 = normalize_ray(apply(cocycle[j], r1));
            r2 = normalize_ray(apply(cocycle[j], r2));
            if (diameters)
                diameters->push_back(
                    projective_distance(projective_angle(r1), projective_angle(r2)));
        }
        DirectionEstimate& e = out.at_mesh[k];
        double a1 = projective_angle(r1), a2 = projective_angle(r2);
        e.unstable_diameter = projective_distance(a1, a2);
        e.unstable_angle = projective_angle(r1 + (dot(r1, r2) < 0.0 ? -r2 : r2));
        if (depth == 0) e.unstable_angle = 0.25 * kPi;  // raw cone bisector
        e.unstable_depth = depth;
    };

    auto chain_backward = [&](int k, int depth, std::vector<double>* diameters) {
        Vec2 r1{1.0, 0.0}, r2{0.0, 1.0};
        for (int j = k + depth - 1; j >= k; --j) {
            r1 = normalize_ray(apply_inverse_ray(cocycle[j], r1));
            r2 = normalize_ray(apply_inverse_ray(cocycle[j], r2));
            if (diameters)
                diameters->push_back(
                    projective_distance(projective_angle(r1), projective_angle(r2)));
        }
        DirectionEstimate& e = out.at_mesh[k];
        double a1 = projective_angle(r1), a2 = projective_angle(r2);
        e.stable_diameter = projective_distance(a1, a2);
        e.stable_angle = projective_angle(r1 + (dot(r1, r2) < 0.0 ? -r2 : r2));
        if (depth == 0) e.stable_angle = 0.75 * kPi;
        e.stable_depth = depth;
    };

    for (int k = 0; k <= n; ++k) {
        chain_forward(k, std::min(iterations, k), k == n ? &out.forward_diameters : nullptr);
        chain_backward(k, std::min(iterations, n - k), k == 0 ? &out.backward_diameters : nullptr);
    }

    auto contracting_chain = [](const std::vector<double>& ds) {
        if (ds.empty()) return true;
        double prev = 0.5 * kPi;  // seed rays (1,0), (0,1)
        for (double d : ds) {
            if (d > prev + 1e-9) return false;
            prev = d;
        }
        return ds.back() < 0.49 * kPi;
    };
    out.contracting =
        contracting_chain(out.forward_diameters) && contracting_chain(out.backward_diameters);
    return out;
}

}  // namespace hypb
