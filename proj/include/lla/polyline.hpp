#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>

#include "lla/geom.hpp"

// Shared arc-length lookup and projection machinery for closed polylines
// (track centerline and raceline).

namespace lla::poly {

struct View {
    std::span<const Vec2> points;
    std::span<const double> s;  // cumulative arc length, s[0] = 0
    double length = 0.0;        // including the wrap segment
};

inline double wrap_s(const View& v, double s_query) {
    double w = std::fmod(s_query, v.length);
    if (w < 0.0) w += v.length;
    return w;
}

struct SegLoc {
    std::size_t i = 0;
    std::size_t j = 0;
    double t = 0.0;
};

inline SegLoc locate(const View& v, double s_query) {
    const double sq = wrap_s(v, s_query);
    const std::size_t n = v.s.size();
    auto it = std::upper_bound(v.s.begin(), v.s.end(), sq);
    std::size_t i = (it == v.s.begin()) ? 0 : static_cast<std::size_t>(it - v.s.begin()) - 1;
    std::size_t j = i + 1;
    double seg_len;
    if (j >= n) {
        j = 0;
        seg_len = v.length - v.s[i];
    } else {
        seg_len = v.s[j] - v.s[i];
    }
    double t = (seg_len > 0.0) ? (sq - v.s[i]) / seg_len : 0.0;
    return {i, j, std::clamp(t, 0.0, 1.0)};
}

inline Vec2 point_at(const View& v, double s_query) {
    SegLoc l = locate(v, s_query);
    return v.points[l.i] + (v.points[l.j] - v.points[l.i]) * l.t;
}

inline double value_at(const View& v, std::span<const double> values, double s_query) {
    SegLoc l = locate(v, s_query);
    return values[l.i] + (values[l.j] - values[l.i]) * l.t;
}

// Interpolates an angle array across the seam without 2*pi jumps.
inline double angle_at(const View& v, std::span<const double> angles, double s_query) {
    SegLoc l = locate(v, s_query);
    return angles[l.i] + wrap_pi(angles[l.j] - angles[l.i]) * l.t;
}

struct Projection {
    double s = 0.0;
    double e_y = 0.0;   // left positive
    double dist = 0.0;  // unsigned distance
};

// Nearest-segment projection. hint_s restricts the scan to a +-5% of length
// window; equidistant candidates resolve to the lowest s.
inline Projection project(const View& v, const Vec2& q, std::optional<double> hint_s) {
    const std::size_t n = v.points.size();
    const std::size_t n_segs = n;  // closed

    std::size_t seg_begin = 0, seg_count = n_segs;
    if (hint_s) {
        const double window = 0.05 * v.length;
        const double s_lo = wrap_s(v, *hint_s - window);
        auto it = std::upper_bound(v.s.begin(), v.s.end(), s_lo);
        seg_begin = (it == v.s.begin()) ? 0 : static_cast<std::size_t>(it - v.s.begin()) - 1;
        const double frac = 2.0 * window / v.length;
        seg_count = std::min<std::size_t>(n_segs,
                                          static_cast<std::size_t>(std::ceil(frac * n_segs)) + 2);
    }

    double best_d2 = std::numeric_limits<double>::infinity();
    double best_s = 0.0;
    Vec2 best_pt{};
    std::size_t best_i = 0;

    for (std::size_t k = 0; k < seg_count; ++k) {
        const std::size_t i = (seg_begin + k) % n_segs;
        const std::size_t j = (i + 1) % n;
        const Vec2 d = v.points[j] - v.points[i];
        const double len2 = norm_sq(d);
        const double t = (len2 > 0.0) ? std::clamp(dot(q - v.points[i], d) / len2, 0.0, 1.0) : 0.0;
        const Vec2 p = v.points[i] + d * t;
        const double d2 = norm_sq(q - p);
        const double seg_len = (j == 0) ? v.length - v.s[i] : v.s[j] - v.s[i];
        double s_here = v.s[i] + t * seg_len;
        if (s_here >= v.length) s_here -= v.length;
        if (d2 < best_d2 || (d2 == best_d2 && s_here < best_s)) {
            best_d2 = d2;
            best_s = s_here;
            best_pt = p;
            best_i = i;
        }
    }

    const std::size_t j = (best_i + 1) % n;
    const Vec2 tangent = v.points[j] - v.points[best_i];
    Projection out;
    out.s = best_s;
    out.dist = std::sqrt(best_d2);
    out.e_y = cross(tangent, q - best_pt) / norm(tangent);
    return out;
}

}  // namespace lla::poly
