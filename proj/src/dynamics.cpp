#include "lla/dynamics.hpp"

namespace lla {

VehicleState plant_step(const VehicleState& s, const ControlInput& u, const VehicleFixedParams& fixed,
                        const TireSurfaceParams& theta, double dt_control, int n_substeps) {
    if (!(dt_control > 0.0)) throw std::invalid_argument("plant_step: dt must be positive");
    if (n_substeps < 1) throw std::invalid_argument("plant_step: need at least one substep");
    if (!is_finite(s)) throw IntegrationError("plant_step: non-finite input state", s);

    const double dt = dt_control / n_substeps;
    VehicleState x = s;
    for (int i = 0; i < n_substeps; ++i) {
        x = step_model(x, u, fixed, theta, dt, dt_control);
        if (!is_finite(x)) throw IntegrationError("integration diverged", x);
    }
    return x;
}

TireSurfaceParams schedule_eval(const ParamSchedule& schedule, double t, int lap,
                                double progress_s) {
    TireSurfaceParams theta = schedule.theta_0;
    double scale = 1.0;

    switch (schedule.kind) {
        case ScheduleKind::constant:
            return theta;
        case ScheduleKind::linear_decay:
            scale = std::max(1.0 - schedule.decay_rate * t, 0.05);
            break;
        case ScheduleKind::step_drop: {
            bool fired = false;
            switch (schedule.trigger) {
                case DropTrigger::time: fired = t >= schedule.trigger_time; break;
                case DropTrigger::lap: fired = lap >= schedule.trigger_lap; break;
                case DropTrigger::position: fired = progress_s >= schedule.trigger_progress; break;
            }
            if (!fired) return theta;
            scale = 1.0 - schedule.drop_fraction;
            break;
        }
    }

    theta.d_f *= scale;
    theta.d_r *= scale;
    if (schedule.co_scale_bc) {
        theta.b_f *= scale;
        theta.b_r *= scale;
        theta.c_f *= scale;
        theta.c_r *= scale;
    }
    return theta;
}

}  // namespace lla
