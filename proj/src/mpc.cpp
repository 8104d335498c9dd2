#include "lla/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lla/rng.hpp"

namespace lla {

void MPCConfig::validate() const {
    if (h_steps < 1) throw ValidationError("mpc: horizon must be at least 1 step");
    if (samples < 1) throw ValidationError("mpc: need at least 1 sample per iteration");
    if (elites < 1 || elites > samples) throw ValidationError("mpc: elites must be in [1, samples]");
    if (iterations < 1) throw ValidationError("mpc: need at least 1 iteration");
    if (q_pos < 0 || q_phi < 0 || q_v < 0 || r_d < 0 || r_ddelta < 0 || r_rate < 0 ||
        terminal_scale < 0 || boundary_weight < 0)
        throw ValidationError("mpc: weights must be non-negative");
    if (!(noise_decay > 0.0)) throw ValidationError("mpc: noise decay must be positive");
}

MpcSolver::MpcSolver(MPCConfig cfg, VehicleFixedParams fixed, double dt, const Track* track,
                     ThreadPool* pool)
    : cfg_(cfg), fixed_(fixed), dt_(dt), track_(track), pool_(pool) {
    cfg_.validate();
    if (!(dt > 0.0)) throw ValidationError("mpc: dt must be positive");
}

ControlInput MpcSolver::clamp_input(const ControlInput& u) const {
    return {std::clamp(u.d, fixed_.d_min, fixed_.d_max),
            std::clamp(u.ddelta, -fixed_.ddelta_max, fixed_.ddelta_max)};
}

std::pair<double, std::vector<VehicleState>> MpcSolver::rollout_cost(
    const TireSurfaceParams& theta, const VehicleState& x0, const std::vector<ControlInput>& inputs,
    const ReferenceTrajectory& ref, const ControlInput& prev_input) const {
    const int h = cfg_.h_steps;
    if (static_cast<int>(inputs.size()) != h) throw ValidationError("rollout: input length mismatch");
    if (static_cast<int>(ref.size()) != h + 1) throw ValidationError("rollout: reference length mismatch");

    std::vector<VehicleState> states(static_cast<std::size_t>(h) + 1);
    states[0] = x0;

    auto tracking = [&](const VehicleState& s, int k, double scale) {
        const double ex = s.x - ref.x[static_cast<std::size_t>(k)];
        const double ey = s.y - ref.y[static_cast<std::size_t>(k)];
        const double ephi = angle_diff(s.phi, ref.phi[static_cast<std::size_t>(k)]);
        const double ev = s.vx - ref.v[static_cast<std::size_t>(k)];
        return scale * (cfg_.q_pos * (ex * ex + ey * ey) + cfg_.q_phi * ephi * ephi + cfg_.q_v * ev * ev);
    };

    auto boundary = [&](const VehicleState& s, int k) {
        if (track_ == nullptr || cfg_.boundary_weight == 0.0) return 0.0;
        CurvilinearPose pose = project(*track_, {s.x, s.y}, ref.s[static_cast<std::size_t>(k)]);
        double free_left = track_->half_width_left_at(pose.s) - cfg_.boundary_margin;
        double free_right = track_->half_width_right_at(pose.s) - cfg_.boundary_margin;
        double excess = 0.0;
        if (pose.e_y > free_left) excess = pose.e_y - free_left;
        else if (pose.e_y < -free_right) excess = -free_right - pose.e_y;
        return cfg_.boundary_weight * excess * excess;
    };

    double cost = 0.0;
    ControlInput u_prev = prev_input;
    for (int k = 0; k < h; ++k) {
        const ControlInput& u = inputs[static_cast<std::size_t>(k)];
        cost += tracking(states[static_cast<std::size_t>(k)], k, 1.0);
        cost += cfg_.r_d * u.d * u.d + cfg_.r_ddelta * u.ddelta * u.ddelta;
        const double rate_d = u.d - u_prev.d;
        const double rate_dd = u.ddelta - u_prev.ddelta;
        cost += cfg_.r_rate * (rate_d * rate_d + rate_dd * rate_dd);
        u_prev = u;

        VehicleState next = step_model(states[static_cast<std::size_t>(k)], u, fixed_, theta, dt_, dt_);
        states[static_cast<std::size_t>(k) + 1] = next;
        if (!is_finite(next) || !std::isfinite(cost)) {
            return {kDivergedRolloutCost, std::move(states)};
        }
        cost += boundary(next, k + 1);
    }
    cost += tracking(states[static_cast<std::size_t>(h)], h, cfg_.terminal_scale);
    if (!std::isfinite(cost)) return {kDivergedRolloutCost, std::move(states)};
    return {cost, std::move(states)};
}

std::vector<ControlInput> MpcSolver::shifted_or_zero(const std::optional<Solution>& warm) const {
    std::vector<ControlInput> seq(static_cast<std::size_t>(cfg_.h_steps));
    if (warm && static_cast<int>(warm->inputs.size()) == cfg_.h_steps) {
        for (int k = 0; k + 1 < cfg_.h_steps; ++k) seq[static_cast<std::size_t>(k)] = warm->inputs[static_cast<std::size_t>(k) + 1];
        seq[static_cast<std::size_t>(cfg_.h_steps) - 1] = warm->inputs.back();  // repeat last
    }
    return seq;  // zeros when no warm start
}

Solution MpcSolver::solve(const TireSurfaceParams& theta, const VehicleState& x0,
                          const ReferenceTrajectory& ref, const ControlInput& prev_input,
                          const std::optional<Solution>& warm_start, std::uint64_t call_id) const {
    const int h = cfg_.h_steps;
    const int n_cands = cfg_.samples + 2;  // [0] shifted warm start, [1] zero sequence

    std::vector<std::vector<ControlInput>> cands(static_cast<std::size_t>(n_cands));
    std::vector<double> costs(static_cast<std::size_t>(n_cands));
    std::vector<std::vector<VehicleState>> rollouts(static_cast<std::size_t>(n_cands));

    const std::vector<ControlInput> shifted = shifted_or_zero(warm_start);
    const std::vector<ControlInput> zeros(static_cast<std::size_t>(h));

    std::vector<ControlInput> mean = shifted;
    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<ControlInput> best_inputs;
    std::vector<VehicleState> best_states;

    std::vector<int> order(static_cast<std::size_t>(n_cands));

    for (int iter = 0; iter < cfg_.iterations; ++iter) {
        const double scale = std::pow(cfg_.noise_decay, iter);
        const double sd_d = cfg_.noise_d * scale;
        const double sd_dd = cfg_.noise_ddelta * scale;

        cands[0] = shifted;
        cands[1] = zeros;
        for (int c = 0; c < cfg_.samples; ++c) {
            auto& seq = cands[static_cast<std::size_t>(c) + 2];
            seq.resize(static_cast<std::size_t>(h));
            for (int k = 0; k < h; ++k) {
                const std::uint64_t key =
                    rng::mix(cfg_.seed, call_id,
                             (static_cast<std::uint64_t>(iter) << 40) ^
                                 (static_cast<std::uint64_t>(c) << 20) ^ static_cast<std::uint64_t>(k));
                ControlInput u = mean[static_cast<std::size_t>(k)];
                u.d += sd_d * rng::gaussian(rng::mix(key, 0));
                u.ddelta += sd_dd * rng::gaussian(rng::mix(key, 1));
                seq[static_cast<std::size_t>(k)] = clamp_input(u);
            }
        }

        auto body = [&](std::size_t begin, std::size_t end) {
            for (std::size_t c = begin; c < end; ++c) {
                auto [cost, states] = rollout_cost(theta, x0, cands[c], ref, prev_input);
                costs[c] = cost;
                rollouts[c] = std::move(states);
            }
        };
        if (pool_ != nullptr) {
            pool_->parallel_for(static_cast<std::size_t>(n_cands), body);
        } else {
            body(0, static_cast<std::size_t>(n_cands));
        }

        // Deterministic elite selection: stable order by (cost, index).
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (costs[static_cast<std::size_t>(a)] != costs[static_cast<std::size_t>(b)])
                return costs[static_cast<std::size_t>(a)] < costs[static_cast<std::size_t>(b)];
            return a < b;
        });

        if (costs[static_cast<std::size_t>(order[0])] < best_cost) {
            best_cost = costs[static_cast<std::size_t>(order[0])];
            best_inputs = cands[static_cast<std::size_t>(order[0])];
            best_states = rollouts[static_cast<std::size_t>(order[0])];
        }

        // Refit the mean from the elites (fixed summation order).
        const int n_elites = std::min(cfg_.elites, n_cands);
        for (int k = 0; k < h; ++k) {
            double sum_d = 0.0, sum_dd = 0.0;
            for (int e = 0; e < n_elites; ++e) {
                const auto& u = cands[static_cast<std::size_t>(order[static_cast<std::size_t>(e)])][static_cast<std::size_t>(k)];
                sum_d += u.d;
                sum_dd += u.ddelta;
            }
            mean[static_cast<std::size_t>(k)] = {sum_d / n_elites, sum_dd / n_elites};
        }
    }

    Solution sol;
    sol.inputs = std::move(best_inputs);
    sol.predicted_states = std::move(best_states);
    sol.cost = best_cost;
    return sol;
}

Solution MpcSolver::oracle_step(const ParamSchedule& schedule, double t, int lap, double progress_s,
                                const VehicleState& x0, const ReferenceTrajectory& ref_true_mu,
                                const ControlInput& prev_input,
                                const std::optional<Solution>& warm_start,
                                std::uint64_t call_id) const {
    const TireSurfaceParams theta = schedule_eval(schedule, t, lap, progress_s);
    return solve(theta, x0, ref_true_mu, prev_input, warm_start, call_id);
}

}  // namespace lla
