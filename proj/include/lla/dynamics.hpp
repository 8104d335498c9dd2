#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lla/geom.hpp"

namespace lla {

// State of the dynamic bicycle model: pose, body-frame velocities, yaw rate
// and steering angle.
struct VehicleState {
    double x = 0.0;
    double y = 0.0;
    double phi = 0.0;
    double vx = 0.0;
    double vy = 0.0;
    double omega = 0.0;
    double delta = 0.0;
};

struct ControlInput {
    double d = 0.0;       // motor duty
    double ddelta = 0.0;  // steering increment per control period (rad)
};

struct VehicleFixedParams {
    double m = 0.041;
    double i_z = 27.8e-6;
    double l_f = 0.029;
    double l_r = 0.033;
    double g = 9.81;
    double c_m1 = 0.287;
    double c_m2 = 0.0545;
    double delta_max = 0.40;
    double d_min = -1.0;
    double d_max = 1.0;
    double ddelta_max = 0.06;
    double vx_floor = 0.05;
};

// Adapted tire/surface parameter vector: Pacejka (B, C, D) per axle plus
// rolling resistance and aero drag.
struct TireSurfaceParams {
    double b_f = 0.0;
    double b_r = 0.0;
    double c_f = 0.0;
    double c_r = 0.0;
    double d_f = 0.0;
    double d_r = 0.0;
    double c_ro = 0.0;
    double c_d = 0.0;

    double& entry(int i) { return (&b_f)[i]; }
    double entry(int i) const { return (&b_f)[i]; }
    static constexpr int n_entries = 8;
};

static_assert(sizeof(TireSurfaceParams) == 8 * sizeof(double));

inline bool is_finite(const VehicleState& s) {
    return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.phi) && std::isfinite(s.vx) &&
           std::isfinite(s.vy) && std::isfinite(s.omega) && std::isfinite(s.delta);
}

inline bool is_finite(const TireSurfaceParams& t) {
    for (int i = 0; i < TireSurfaceParams::n_entries; ++i)
        if (!std::isfinite(t.entry(i))) return false;
    return true;
}

struct SlipAngles {
    double front = 0.0;
    double rear = 0.0;
};

inline SlipAngles slip_angles(const VehicleState& s, double l_f, double l_r, double vx_floor) {
    double vx_eff = std::max(s.vx, vx_floor);
    return {s.delta - std::atan((s.omega * l_f + s.vy) / vx_eff),
            std::atan((s.omega * l_r - s.vy) / vx_eff)};
}

inline double pacejka_lateral(double alpha, double b, double c, double d) {
    return d * std::sin(c * std::atan(b * alpha));
}

inline double longitudinal_force(double vx, double d, double c_m1, double c_m2, double c_ro,
                                 double c_d) {
    return (c_m1 - c_m2 * vx) * d - c_ro - c_d * vx * vx;
}

// Time derivative of the full 7-state model (flat track, roll = pitch = 0).
// dt_steer is the control period entering the steering-rate row.
inline VehicleState dbm_derivative(const VehicleState& s, const ControlInput& u,
                                   const VehicleFixedParams& fixed, const TireSurfaceParams& theta,
                                   double dt_steer) {
    const SlipAngles alpha = slip_angles(s, fixed.l_f, fixed.l_r, fixed.vx_floor);
    const double f_fy = pacejka_lateral(alpha.front, theta.b_f, theta.c_f, theta.d_f);
    const double f_ry = pacejka_lateral(alpha.rear, theta.b_r, theta.c_r, theta.d_r);
    const double f_rx = longitudinal_force(s.vx, u.d, fixed.c_m1, fixed.c_m2, theta.c_ro, theta.c_d);

    const double sin_phi = std::sin(s.phi);
    const double cos_phi = std::cos(s.phi);
    const double sin_delta = std::sin(s.delta);
    const double cos_delta = std::cos(s.delta);

    VehicleState der;
    der.x = s.vx * cos_phi - s.vy * sin_phi;
    der.y = s.vx * sin_phi + s.vy * cos_phi;
    der.phi = s.omega;
    der.vx = (f_rx - f_fy * sin_delta + fixed.m * s.vy * s.omega) / fixed.m;
    der.vy = (f_ry + f_fy * cos_delta - fixed.m * s.vx * s.omega) / fixed.m;
    der.omega = (f_fy * fixed.l_f * cos_delta - f_ry * fixed.l_r) / fixed.i_z;
    der.delta = u.ddelta / dt_steer;
    return der;
}

// Classical RK4 with the input held constant over dt. The derivative functor
// has signature f(state, input) -> state derivative.
template <typename DerivFn>
VehicleState rk4_step(DerivFn&& f, const VehicleState& s, const ControlInput& u, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be positive");

    auto axpy = [](const VehicleState& a, const VehicleState& b, double h) {
        VehicleState r;
        r.x = a.x + h * b.x;
        r.y = a.y + h * b.y;
        r.phi = a.phi + h * b.phi;
        r.vx = a.vx + h * b.vx;
        r.vy = a.vy + h * b.vy;
        r.omega = a.omega + h * b.omega;
        r.delta = a.delta + h * b.delta;
        return r;
    };

    VehicleState k1 = f(s, u);
    VehicleState k2 = f(axpy(s, k1, dt / 2.0), u);
    VehicleState k3 = f(axpy(s, k2, dt / 2.0), u);
    VehicleState k4 = f(axpy(s, k3, dt), u);

    VehicleState r;
    r.x = s.x + dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    r.y = s.y + dt / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
    r.phi = s.phi + dt / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi);
    r.vx = s.vx + dt / 6.0 * (k1.vx + 2.0 * k2.vx + 2.0 * k3.vx + k4.vx);
    r.vy = s.vy + dt / 6.0 * (k1.vy + 2.0 * k2.vy + 2.0 * k3.vy + k4.vy);
    r.omega = s.omega + dt / 6.0 * (k1.omega + 2.0 * k2.omega + 2.0 * k3.omega + k4.omega);
    r.delta = s.delta + dt / 6.0 * (k1.delta + 2.0 * k2.delta + 2.0 * k3.delta + k4.delta);
    return r;
}

// One RK4 step of the bicycle model under theta, steering clamped afterwards.
// dt_steer stays at the control period even when dt is a substep.
inline VehicleState step_model(const VehicleState& s, const ControlInput& u,
                               const VehicleFixedParams& fixed, const TireSurfaceParams& theta,
                               double dt, double dt_steer) {
    VehicleState r = rk4_step(
        [&](const VehicleState& x, const ControlInput& uu) {
            return dbm_derivative(x, uu, fixed, theta, dt_steer);
        },
        s, u, dt);
    r.delta = std::clamp(r.delta, -fixed.delta_max, fixed.delta_max);
    return r;
}

struct IntegrationError : std::runtime_error {
    VehicleState state;
    IntegrationError(const std::string& what, VehicleState offending)
        : std::runtime_error(what), state(offending) {}
};

// Plant stepping over one control period with n_substeps internal RK4 steps.
// Throws IntegrationError when the state leaves the finite domain.
VehicleState plant_step(const VehicleState& s, const ControlInput& u, const VehicleFixedParams& fixed,
                        const TireSurfaceParams& theta, double dt_control, int n_substeps);

enum class ScheduleKind { constant, linear_decay, step_drop };

enum class DropTrigger { time, lap, position };

// Time-varying plant parameter schedule. Friction changes scale the peak
// lateral forces D; B and C co-scale only when co_scale_bc is set.
struct ParamSchedule {
    ScheduleKind kind = ScheduleKind::constant;
    TireSurfaceParams theta_0;
    double decay_rate = 0.0;      // fraction per second for linear_decay
    double drop_fraction = 0.0;   // in (0, 1) for step_drop
    DropTrigger trigger = DropTrigger::time;
    double trigger_time = 0.0;          // seconds
    int trigger_lap = 1;                // completed laps
    double trigger_progress = 0.0;      // cumulative arc length (m)
    bool co_scale_bc = false;
};

// Evaluates the schedule at time t with the given completed-lap count and
// cumulative arc-length progress. Decay floors at 5% of the initial value.
TireSurfaceParams schedule_eval(const ParamSchedule& schedule, double t, int lap,
                                double progress_s = 0.0);

}  // namespace lla
