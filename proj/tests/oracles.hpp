#pragma once

// Independent scalar re-implementations used as test oracles. Deliberately
// written against plain arrays, separate from the library code paths they
// cross-check.

#include <array>
#include <cmath>

namespace oracles {

using State7 = std::array<double, 7>;  // x, y, phi, vx, vy, omega, delta

struct Params {
    double m, iz, lf, lr;
    double cm1, cm2;
    double bf, br, cf, cr, df, dr, cro, cd;
    double vx_floor;
};

inline State7 bicycle_deriv(const State7& s, double d, double ddelta, double dt_steer,
                            const Params& p) {
    const double phi = s[2], vx = s[3], vy = s[4], omega = s[5], delta = s[6];
    const double vx_eff = std::max(vx, p.vx_floor);
    const double alpha_f = delta - std::atan((omega * p.lf + vy) / vx_eff);
    const double alpha_r = std::atan((omega * p.lr - vy) / vx_eff);
    const double ffy = p.df * std::sin(p.cf * std::atan(p.bf * alpha_f));
    const double fry = p.dr * std::sin(p.cr * std::atan(p.br * alpha_r));
    const double frx = (p.cm1 - p.cm2 * vx) * d - p.cro - p.cd * vx * vx;

    State7 out;
    out[0] = vx * std::cos(phi) - vy * std::sin(phi);
    out[1] = vx * std::sin(phi) + vy * std::cos(phi);
    out[2] = omega;
    out[3] = (frx - ffy * std::sin(delta) + p.m * vy * omega) / p.m;
    out[4] = (fry + ffy * std::cos(delta) - p.m * vx * omega) / p.m;
    out[5] = (ffy * p.lf * std::cos(delta) - fry * p.lr) / p.iz;
    out[6] = ddelta / dt_steer;
    return out;
}

inline State7 rk4(const State7& s, double d, double ddelta, double dt, double dt_steer,
                  const Params& p) {
    auto add = [](const State7& a, const State7& b, double h) {
        State7 r;
        for (int i = 0; i < 7; ++i) r[i] = a[i] + h * b[i];
        return r;
    };
    State7 k1 = bicycle_deriv(s, d, ddelta, dt_steer, p);
    State7 k2 = bicycle_deriv(add(s, k1, dt / 2), d, ddelta, dt_steer, p);
    State7 k3 = bicycle_deriv(add(s, k2, dt / 2), d, ddelta, dt_steer, p);
    State7 k4 = bicycle_deriv(add(s, k3, dt), d, ddelta, dt_steer, p);
    State7 r;
    for (int i = 0; i < 7; ++i) r[i] = s[i] + dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    return r;
}

inline double circle_distance(double a, double b) {
    double d = std::fmod(std::fabs(a - b), 2.0 * M_PI);
    return std::min(d, 2.0 * M_PI - d);
}

}  // namespace oracles
