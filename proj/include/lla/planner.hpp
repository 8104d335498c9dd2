#pragma once

#include <optional>
#include <vector>

#include "lla/dynamics.hpp"
#include "lla/track.hpp"

namespace lla {

// Curvature-optimized path inside the track bounds, stored as lateral
// offsets from the centerline plus its own recomputed geometry.
struct RaceLine {
    std::vector<Vec2> points;
    std::vector<double> s;          // arc length along the raceline
    std::vector<double> heading;
    std::vector<double> curvature;
    std::vector<double> offset;     // alpha(s), left positive, vs. centerline
    double length = 0.0;

    std::size_t size() const { return points.size(); }
    double wrap_s(double s_query) const;
    Vec2 point_at(double s_query) const;
    double heading_at(double s_query) const;
    double curvature_at(double s_query) const;

    // Nearest-point projection onto the raceline polyline (hinted like
    // track projection).
    CurvilinearPose project(const Vec2& point, std::optional<double> hint_s = std::nullopt) const;
};

struct SpeedLimits {
    double a_acc_scale = 0.5;    // fraction of mu*g usable for acceleration
    double a_brake_scale = 0.6;  // fraction of mu*g usable for braking
    double a_lat_scale = 1.0;    // lateral limit = a_lat_scale * mu * g; 2.0 plans at the
                                 // physical peak (D_f + D_r)/m implied by mu's weight normalization
    double v_max = 3.0;          // m/s
    double kappa_min = 1e-3;     // 1/m curvature floor
    double g = 9.81;
};

struct VelocityProfileLibrary {
    std::vector<double> mu_grid;                 // ascending
    std::vector<std::vector<double>> profiles;   // per mu, v at each raceline sample
    SpeedLimits limits;

    double mu_min() const { return mu_grid.front(); }
    double mu_max() const { return mu_grid.back(); }
};

struct ReferenceTrajectory {
    std::vector<double> s;      // raceline arc length per sample
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> phi;
    std::vector<double> v;

    std::size_t size() const { return s.size(); }  // H_steps + 1
};

// Projected gradient descent on lateral offsets minimizing the summed
// squared curvature of the offset polyline. Offsets stay within
// +-(half_width - margin); the objective never increases across iterations.
RaceLine min_curvature_raceline(const Track& track, double margin, int iters, double step);

// Friction-limited speed profile: curvature-limited cap, then forward
// (acceleration) and backward (braking) passes iterated twice around the
// closed loop.
std::vector<double> velocity_profile(const RaceLine& raceline, double mu, const SpeedLimits& limits);

VelocityProfileLibrary build_library(const RaceLine& raceline, double mu_min, double mu_max,
                                     int n_profiles, const SpeedLimits& limits);

// Interpolated profile speed at arc length s for friction mu_hat (clamped
// into the library range).
double library_speed(const RaceLine& raceline, const VelocityProfileLibrary& library, double mu_hat,
                     double s_query);

// Reference for the MPC horizon: starts from the raceline point nearest the
// vehicle and advances at the interpolated profile speed.
ReferenceTrajectory reference(const RaceLine& raceline, const VelocityProfileLibrary& library,
                              double mu_hat, const VehicleState& state, int h_steps, double dt,
                              std::optional<double> hint_s = std::nullopt);

}  // namespace lla
