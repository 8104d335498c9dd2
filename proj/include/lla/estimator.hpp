#pragma once

#include <algorithm>
#include <stdexcept>

namespace lla {

// Friction coefficient from the selected model's peak lateral forces,
// normalized by vehicle weight.
inline double raw_friction(double d_f, double d_r, double m, double g) {
    if (!(m > 0.0) || !(g > 0.0)) throw std::invalid_argument("raw_friction: m and g must be positive");
    return (d_f + d_r) / (2.0 * m * g);
}

inline double smooth(double mu_prev, double mu_raw, double gamma) {
    if (!(gamma > 0.0) || gamma > 1.0) throw std::invalid_argument("smooth: gamma must be in (0, 1]");
    return gamma * mu_raw + (1.0 - gamma) * mu_prev;
}

// Exponentially smoothed online friction estimate.
struct FrictionEstimate {
    double gamma = 0.05;
    double mu_init = 1.0;
    double mu = 1.0;      // smoothed estimate
    double mu_raw = 1.0;  // last raw sample

    FrictionEstimate() = default;
    FrictionEstimate(double gamma_, double mu_init_) : gamma(gamma_), mu_init(mu_init_), mu(mu_init_), mu_raw(mu_init_) {
        if (!(gamma > 0.0) || gamma > 1.0) throw std::invalid_argument("FrictionEstimate: gamma must be in (0, 1]");
        if (!(mu_init > 0.0)) throw std::invalid_argument("FrictionEstimate: mu_init must be positive");
    }

    double update(double d_f, double d_r, double m, double g) {
        mu_raw = raw_friction(d_f, d_r, m, g);
        mu = smooth(mu, mu_raw, gamma);
        return mu;
    }
};

}  // namespace lla
