#include "lla/track.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "lla/polyline.hpp"

namespace lla {

namespace {

std::size_t prev_index(std::size_t i, std::size_t n, bool closed) {
    if (i > 0) return i - 1;
    return closed ? n - 1 : 0;
}

std::size_t next_index(std::size_t i, std::size_t n, bool closed) {
    if (i + 1 < n) return i + 1;
    return closed ? 0 : n - 1;
}

poly::View view_of(const Track& t) { return {t.centerline, t.s, t.length}; }

}  // namespace

PolylineGeometry compute_polyline_geometry(const std::vector<Vec2>& points, bool closed) {
    const std::size_t n = points.size();
    if (n < 3) throw ValidationError("polyline needs at least 3 points");

    PolylineGeometry g;
    g.s.resize(n);
    g.heading.resize(n);
    g.curvature.resize(n);

    g.s[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        g.s[i] = g.s[i - 1] + norm(points[i] - points[i - 1]);
        if (g.s[i] <= g.s[i - 1]) throw ValidationError("duplicate consecutive track points");
    }
    g.length = g.s[n - 1];
    if (closed) {
        double wrap_len = norm(points[0] - points[n - 1]);
        if (wrap_len <= 0.0) throw ValidationError("closed track repeats its first point");
        g.length += wrap_len;
    }

    // Tangent heading via central difference of position; open ends fall
    // back to one-sided differences.
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t ip = prev_index(i, n, closed);
        std::size_t in = next_index(i, n, closed);
        Vec2 d = points[in] - points[ip];
        g.heading[i] = std::atan2(d.y, d.x);
    }

    auto arc_gap = [&](std::size_t a, std::size_t b) {
        double ds = g.s[b] - g.s[a];
        if (ds <= 0.0) ds += g.length;
        return ds;
    };

    // Curvature as unwrapped heading change over arc length.
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t ip = prev_index(i, n, closed);
        std::size_t in = next_index(i, n, closed);
        double dh = wrap_pi(g.heading[in] - g.heading[ip]);
        double ds = (ip == in) ? 0.0 : arc_gap(ip, in);
        g.curvature[i] = (ds > 0.0) ? dh / ds : 0.0;
    }
    if (!closed && n >= 2) {
        g.curvature[0] = g.curvature[1];
        g.curvature[n - 1] = g.curvature[n - 2];
    }
    return g;
}

Track make_track(std::vector<Vec2> centerline, std::vector<double> half_width_left,
                 std::vector<double> half_width_right, bool closed) {
    const std::size_t n = centerline.size();
    if (half_width_left.size() != n || half_width_right.size() != n)
        throw ValidationError("track width arrays must match centerline length");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(half_width_left[i] > 0.0) || !(half_width_right[i] > 0.0))
            throw ValidationError("track half-widths must be positive (point " + std::to_string(i) + ")");
    }

    PolylineGeometry g = compute_polyline_geometry(centerline, closed);

    Track t;
    t.centerline = std::move(centerline);
    t.half_width_left = std::move(half_width_left);
    t.half_width_right = std::move(half_width_right);
    t.s = std::move(g.s);
    t.heading = std::move(g.heading);
    t.curvature = std::move(g.curvature);
    t.closed = closed;
    t.length = g.length;
    return t;
}

double Track::wrap_s(double s_query) const { return poly::wrap_s(view_of(*this), s_query); }

Vec2 Track::point_at(double s_query) const { return poly::point_at(view_of(*this), s_query); }

double Track::heading_at(double s_query) const {
    return poly::angle_at(view_of(*this), heading, s_query);
}

double Track::curvature_at(double s_query) const {
    return poly::value_at(view_of(*this), curvature, s_query);
}

double Track::half_width_left_at(double s_query) const {
    return poly::value_at(view_of(*this), half_width_left, s_query);
}

double Track::half_width_right_at(double s_query) const {
    return poly::value_at(view_of(*this), half_width_right, s_query);
}

Track load_track(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open track file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty track file: " + path);

    auto strip = [](std::string v) {
        v.erase(std::remove_if(v.begin(), v.end(), [](char c) { return c == ' ' || c == '\r' || c == '\t'; }),
                v.end());
        return v;
    };
    if (strip(line) != "x_m,y_m,w_tr_left_m,w_tr_right_m")
        throw ParseError("unexpected track CSV header: " + line);

    std::vector<Vec2> pts;
    std::vector<double> wl, wr;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        std::string stripped = strip(line);
        if (stripped.empty()) continue;
        std::stringstream ss(stripped);
        double v[4];
        for (int k = 0; k < 4; ++k) {
            std::string cell;
            if (!std::getline(ss, cell, ','))
                throw ParseError("track CSV line " + std::to_string(line_no) + ": expected 4 columns");
            std::size_t used = 0;
            try {
                v[k] = std::stod(cell, &used);
            } catch (const std::exception&) {
                throw ParseError("track CSV line " + std::to_string(line_no) + ": bad number '" + cell + "'");
            }
            if (used != cell.size())
                throw ParseError("track CSV line " + std::to_string(line_no) + ": bad number '" + cell + "'");
        }
        pts.push_back({v[0], v[1]});
        wl.push_back(v[2]);
        wr.push_back(v[3]);
    }
    if (pts.size() < 10) throw ValidationError("degenerate track: fewer than 10 points");

    // Published track files often repeat the first point at the end.
    if (pts.size() > 2 && norm(pts.back() - pts.front()) < 1e-9) {
        pts.pop_back();
        wl.pop_back();
        wr.pop_back();
    }
    return make_track(std::move(pts), std::move(wl), std::move(wr), /*closed=*/true);
}

SyntheticKind synthetic_kind_from_string(const std::string& name) {
    if (name == "circle") return SyntheticKind::circle;
    if (name == "oval") return SyntheticKind::oval;
    if (name == "chicane") return SyntheticKind::chicane;
    throw ValidationError("unsupported synthetic track kind: " + name);
}

namespace {

constexpr double kHalfWidthAtUnitScale = 0.185;  // 1:43-class track width

// Counter-clockwise oval: two straights of length a joined by semicircles
// of radius r, parameterized by arc length u from the start of the bottom
// straight.
Vec2 oval_point(double u, double a, double r) {
    const double arc = M_PI * r;
    const double perimeter = 2.0 * a + 2.0 * arc;
    u = std::fmod(u, perimeter);
    if (u < 0) u += perimeter;

    if (u < a) return {-a / 2.0 + u, -r};  // bottom straight, heading +x
    u -= a;
    if (u < arc) {  // right semicircle
        double ang = u / r;
        return {a / 2.0 + r * std::sin(ang), -r * std::cos(ang)};
    }
    u -= arc;
    if (u < a) return {a / 2.0 - u, r};  // top straight, heading -x
    u -= a;
    double ang = u / r;  // left semicircle
    return {-a / 2.0 - r * std::sin(ang), r * std::cos(ang)};
}

}  // namespace

Track generate_synthetic_track(SyntheticKind kind, double scale, int n_points) {
    if (!(scale > 0.0)) throw ValidationError("track scale must be positive");
    if (n_points < 50) throw ValidationError("synthetic tracks need at least 50 points");

    const double hw = kHalfWidthAtUnitScale * scale;
    std::vector<Vec2> pts(static_cast<std::size_t>(n_points));

    switch (kind) {
        case SyntheticKind::circle: {
            const double radius = scale;
            for (int i = 0; i < n_points; ++i) {
                double ang = 2.0 * M_PI * i / n_points;
                pts[i] = {radius * std::cos(ang), radius * std::sin(ang)};
            }
            break;
        }
        case SyntheticKind::oval: {
            const double a = 1.0 * scale;
            const double r = 0.65 * scale;
            const double perimeter = 2.0 * a + 2.0 * M_PI * r;
            for (int i = 0; i < n_points; ++i) {
                pts[i] = oval_point(perimeter * i / n_points, a, r);
            }
            break;
        }
        case SyntheticKind::chicane: {
            // Oval with an S-bend carved into the top straight: a lateral
            // sine bump, zero value and slope at both ends, so curvature
            // takes both signs.
            const double a = 1.6 * scale;
            const double r = 0.6 * scale;
            const double perimeter = 2.0 * a + 2.0 * M_PI * r;
            const double top_begin = a + M_PI * r;
            const double amp = 0.3 * scale;
            for (int i = 0; i < n_points; ++i) {
                double u = perimeter * i / n_points;
                Vec2 p = oval_point(u, a, r);
                if (u > top_begin && u < top_begin + a) {
                    double frac = (u - top_begin) / a;
                    p.y += amp * std::sin(2.0 * M_PI * frac) * std::sin(M_PI * frac);
                }
                pts[i] = p;
            }
            break;
        }
    }

    std::vector<double> wl(pts.size(), hw), wr(pts.size(), hw);
    return make_track(std::move(pts), std::move(wl), std::move(wr), /*closed=*/true);
}

CurvilinearPose project(const Track& track, const Vec2& point, std::optional<double> hint_s) {
    if (!track.closed) throw ValidationError("projection requires a closed track");
    poly::Projection p = poly::project(view_of(track), point, hint_s);
    return {p.s, p.e_y, 0.0};
}

CurvilinearPose project_pose(const Track& track, const Vec2& point, double heading,
                             std::optional<double> hint_s) {
    CurvilinearPose pose = project(track, point, hint_s);
    pose.e_phi = angle_diff(heading, track.heading_at(pose.s));
    return pose;
}

int lap_counter(double prev_s, double new_s, double track_length) {
    return (prev_s > 0.8 * track_length && new_s < 0.2 * track_length) ? 1 : 0;
}

void dump_track_csv(const Track& track, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (f == nullptr) throw ParseError("cannot write track file: " + path);
    std::fprintf(f, "x_m,y_m,w_tr_left_m,w_tr_right_m\n");
    for (std::size_t i = 0; i < track.size(); ++i) {
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", track.centerline[i].x, track.centerline[i].y,
                     track.half_width_left[i], track.half_width_right[i]);
    }
    std::fclose(f);
}

}  // namespace lla
