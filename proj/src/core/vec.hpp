#pragma once

#include <cmath>

namespace hypb {

// Chart-coordinate 2-vector. All geometry below works in a single periodic
// chart, so a plain value type is enough.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }
};

inline Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double norm(const Vec2& v) { return std::hypot(v.x, v.y); }
inline double norm2(const Vec2& v) { return v.x * v.x + v.y * v.y; }

// Counterclockwise rotation by pi/2.
inline Vec2 perp(const Vec2& v) { return {-v.y, v.x}; }

}  // namespace hypb
