#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lla/dynamics.hpp"
#include "lla/parallel.hpp"
#include "lla/planner.hpp"
#include "lla/track.hpp"

namespace lla {

// Sampling-based receding-horizon controller configuration. Input bounds
// live in VehicleFixedParams.
struct MPCConfig {
    int h_steps = 20;

    // running tracking cost
    double q_pos = 50.0;
    double q_phi = 10.0;
    double q_v = 4.0;
    // input and input-rate costs
    double r_d = 0.05;
    double r_ddelta = 0.5;
    double r_rate = 0.5;
    double terminal_scale = 10.0;
    // soft track-boundary penalty beyond |e_y| > half_width - margin
    double boundary_weight = 2000.0;
    double boundary_margin = 0.02;

    // sampler
    int samples = 64;
    int elites = 8;
    int iterations = 4;
    double noise_d = 0.1;
    double noise_ddelta = 0.05;
    double noise_decay = 0.7;
    std::uint64_t seed = 1;

    void validate() const;
};

struct Solution {
    std::vector<ControlInput> inputs;          // h_steps entries
    std::vector<VehicleState> predicted_states;  // h_steps + 1, [0] = query state
    double cost = 0.0;
};

constexpr double kDivergedRolloutCost = 1e12;

// Receding-horizon solver over a fixed model; rollouts use one RK4 step of
// the bicycle model per control period. The candidate set of every
// iteration contains the shifted warm start and the zero-input sequence,
// so the returned cost never exceeds either.
class MpcSolver {
  public:
    MpcSolver(MPCConfig cfg, VehicleFixedParams fixed, double dt, const Track* track = nullptr,
              ThreadPool* pool = nullptr);

    const MPCConfig& config() const { return cfg_; }

    // Cost and predicted states of one input sequence. prev_input is the
    // previously applied input entering the rate term.
    std::pair<double, std::vector<VehicleState>> rollout_cost(
        const TireSurfaceParams& theta, const VehicleState& x0,
        const std::vector<ControlInput>& inputs, const ReferenceTrajectory& ref,
        const ControlInput& prev_input) const;

    // call_id keys the sampling noise (callers pass the control step index);
    // identical arguments produce bit-identical solutions at any worker
    // count.
    Solution solve(const TireSurfaceParams& theta, const VehicleState& x0,
                   const ReferenceTrajectory& ref, const ControlInput& prev_input,
                   const std::optional<Solution>& warm_start, std::uint64_t call_id = 0) const;

    // Oracle variant: the model comes from the true plant schedule.
    Solution oracle_step(const ParamSchedule& schedule, double t, int lap, double progress_s,
                         const VehicleState& x0, const ReferenceTrajectory& ref_true_mu,
                         const ControlInput& prev_input, const std::optional<Solution>& warm_start,
                         std::uint64_t call_id = 0) const;

  private:
    ControlInput clamp_input(const ControlInput& u) const;
    std::vector<ControlInput> shifted_or_zero(const std::optional<Solution>& warm) const;

    MPCConfig cfg_;
    VehicleFixedParams fixed_;
    double dt_;
    const Track* track_;
    ThreadPool* pool_;
};

}  // namespace lla
