#pragma once

#include <cmath>

namespace lla {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double k) const { return {x * k, y * k}; }
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline double norm_sq(const Vec2& a) { return a.x * a.x + a.y * a.y; }

// Wrap an angle to (-pi, pi].
inline double wrap_pi(double a) {
    double w = std::remainder(a, 2.0 * M_PI);
    if (w <= -M_PI) w += 2.0 * M_PI;
    return w;
}

// Signed difference a - b measured on the circle, in (-pi, pi].
inline double angle_diff(double a, double b) { return wrap_pi(a - b); }

}  // namespace lla
