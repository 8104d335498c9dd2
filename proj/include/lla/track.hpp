#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lla/geom.hpp"

namespace lla {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Arc length, tangent heading and signed curvature of a polyline, computed
// by central finite differences with heading unwrapping.
struct PolylineGeometry {
    std::vector<double> s;
    std::vector<double> heading;
    std::vector<double> curvature;
    double length = 0.0;  // includes the wrap segment when closed
};

PolylineGeometry compute_polyline_geometry(const std::vector<Vec2>& points, bool closed);

struct Track {
    std::vector<Vec2> centerline;
    std::vector<double> half_width_left;
    std::vector<double> half_width_right;
    std::vector<double> s;
    std::vector<double> heading;
    std::vector<double> curvature;
    bool closed = true;
    double length = 0.0;

    std::size_t size() const { return centerline.size(); }

    // Interpolated lookups at arc length s (wrapped into [0, L)).
    Vec2 point_at(double s_query) const;
    double heading_at(double s_query) const;
    double curvature_at(double s_query) const;
    double half_width_left_at(double s_query) const;
    double half_width_right_at(double s_query) const;
    double wrap_s(double s_query) const;
};

struct CurvilinearPose {
    double s = 0.0;      // in [0, L)
    double e_y = 0.0;    // signed lateral deviation, left positive
    double e_phi = 0.0;  // heading error in (-pi, pi], 0 for point-only queries
};

// Builds a track from raw points, validating and precomputing geometry.
Track make_track(std::vector<Vec2> centerline, std::vector<double> half_width_left,
                 std::vector<double> half_width_right, bool closed);

// CSV loader, header `x_m,y_m,w_tr_left_m,w_tr_right_m`.
Track load_track(const std::string& path);

enum class SyntheticKind { circle, oval, chicane };

SyntheticKind synthetic_kind_from_string(const std::string& name);

Track generate_synthetic_track(SyntheticKind kind, double scale, int n_points);

// Nearest-centerline projection. With a hint the search is restricted to a
// +-5% of L arc-length window around it. Ties resolve to the lowest s.
CurvilinearPose project(const Track& track, const Vec2& point,
                        std::optional<double> hint_s = std::nullopt);

// Same, but also fills e_phi = wrap(vehicle_heading - track heading at s).
CurvilinearPose project_pose(const Track& track, const Vec2& point, double heading,
                             std::optional<double> hint_s = std::nullopt);

// 1 iff a forward wrap crossing occurred (prev_s > 0.8 L and new_s < 0.2 L).
int lap_counter(double prev_s, double new_s, double track_length);

void dump_track_csv(const Track& track, const std::string& path);

}  // namespace lla
