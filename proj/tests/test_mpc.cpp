#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lla/harness.hpp"
#include "lla/mpc.hpp"
#include "lla/rng.hpp"
#include "oracles.hpp"

using namespace lla;

namespace {

TireSurfaceParams frictionless_theta() {
    TireSurfaceParams t{2.579, 3.3852, 1.2, 1.2663, 0.192, 0.1737, 0.0518, 0.00035};
    t.c_ro = 0.0;
    t.c_d = 0.0;
    return t;
}

// straight-line reference along +x at constant speed
ReferenceTrajectory straight_ref(double x0, double v, int h, double dt) {
    ReferenceTrajectory ref;
    for (int k = 0; k <= h; ++k) {
        ref.s.push_back(v * dt * k);
        ref.x.push_back(x0 + v * dt * k);
        ref.y.push_back(0.0);
        ref.phi.push_back(0.0);
        ref.v.push_back(v);
    }
    return ref;
}

MPCConfig small_cfg(int h = 8) {
    MPCConfig cfg;
    cfg.h_steps = h;
    cfg.samples = 16;
    cfg.elites = 4;
    cfg.iterations = 2;
    return cfg;
}

}  // namespace

TEST_CASE("rollout cost") {
    VehicleFixedParams fixed;
    const double dt = 0.02;

    SUBCASE("exact tracking with zero inputs costs nothing") {
        TireSurfaceParams theta = frictionless_theta();
        MPCConfig cfg = small_cfg(10);
        MpcSolver solver(cfg, fixed, dt);
        VehicleState x0;
        x0.vx = 1.5;
        auto ref = straight_ref(0.0, 1.5, cfg.h_steps, dt);
        std::vector<ControlInput> zeros(10);
        auto [cost, states] = solver.rollout_cost(theta, x0, zeros, ref, ControlInput{});
        CHECK(cost == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(states.front().x == x0.x);
        CHECK(states.back().x == doctest::Approx(1.5 * dt * 10).epsilon(1e-12));
    }
}

TEST_CASE("rollout cost weight linearity") {
    VehicleFixedParams fixed;
    const double dt = 0.02;
    TireSurfaceParams theta = frictionless_theta();

    MPCConfig cfg = small_cfg(6);
    cfg.q_phi = 0.0;
    cfg.q_v = 0.0;
    cfg.r_d = 0.0;
    cfg.r_ddelta = 0.0;
    cfg.r_rate = 0.0;
    cfg.terminal_scale = 0.0;

    VehicleState x0;
    x0.vx = 1.5;
    x0.y = 0.1;  // constant lateral offset from the reference line
    auto ref = straight_ref(0.0, 1.5, cfg.h_steps, dt);
    std::vector<ControlInput> zeros(6);

    MpcSolver s1(cfg, fixed, dt);
    auto [c1, st1] = s1.rollout_cost(theta, x0, zeros, ref, ControlInput{});
    cfg.q_pos *= 2.0;
    MpcSolver s2(cfg, fixed, dt);
    auto [c2, st2] = s2.rollout_cost(theta, x0, zeros, ref, ControlInput{});
    CHECK(c1 > 0.0);
    CHECK(c2 == doctest::Approx(2.0 * c1).epsilon(1e-12));
}

TEST_CASE("rollout cost matches an independently coded loop") {
    VehicleFixedParams fixed;
    const double dt = 0.02;
    TireSurfaceParams theta{2.579, 3.3852, 1.2, 1.2663, 0.192, 0.1737, 0.0518, 0.00035};
    MPCConfig cfg = small_cfg(8);
    MpcSolver solver(cfg, fixed, dt);

    VehicleState x0{0.05, -0.1, 0.2, 1.3, 0.04, 0.5, 0.03};
    auto ref = straight_ref(0.0, 1.2, cfg.h_steps, dt);
    std::vector<ControlInput> inputs(8);
    for (int k = 0; k < 8; ++k) inputs[k] = {0.3 + 0.02 * k, 0.01 - 0.002 * k};
    ControlInput prev{0.25, 0.0};

    auto [cost, states] = solver.rollout_cost(theta, x0, inputs, ref, prev);

    // independent scalar evaluation of the same cost
    oracles::Params p{fixed.m,   fixed.i_z, fixed.l_f, fixed.l_r, fixed.c_m1, fixed.c_m2,
                      theta.b_f, theta.b_r, theta.c_f, theta.c_r, theta.d_f,  theta.d_r,
                      theta.c_ro, theta.c_d, fixed.vx_floor};
    oracles::State7 x{x0.x, x0.y, x0.phi, x0.vx, x0.vy, x0.omega, x0.delta};
    double expect = 0.0;
    double pd = prev.d, pdd = prev.ddelta;
    for (int k = 0; k < 8; ++k) {
        double ex = x[0] - ref.x[k], ey = x[1] - ref.y[k];
        double ephi = std::remainder(x[2] - ref.phi[k], 2 * M_PI);
        if (ephi <= -M_PI) ephi += 2 * M_PI;
        double ev = x[3] - ref.v[k];
        expect += cfg.q_pos * (ex * ex + ey * ey) + cfg.q_phi * ephi * ephi + cfg.q_v * ev * ev;
        expect += cfg.r_d * inputs[k].d * inputs[k].d +
                  cfg.r_ddelta * inputs[k].ddelta * inputs[k].ddelta;
        expect += cfg.r_rate * ((inputs[k].d - pd) * (inputs[k].d - pd) +
                                (inputs[k].ddelta - pdd) * (inputs[k].ddelta - pdd));
        pd = inputs[k].d;
        pdd = inputs[k].ddelta;
        x = oracles::rk4(x, inputs[k].d, inputs[k].ddelta, dt, dt, p);
        x[6] = std::clamp(x[6], -fixed.delta_max, fixed.delta_max);
    }
    double ex = x[0] - ref.x[8], ey = x[1] - ref.y[8];
    double ephi = std::remainder(x[2] - ref.phi[8], 2 * M_PI);
    if (ephi <= -M_PI) ephi += 2 * M_PI;
    double ev = x[3] - ref.v[8];
    expect += cfg.terminal_scale *
              (cfg.q_pos * (ex * ex + ey * ey) + cfg.q_phi * ephi * ephi + cfg.q_v * ev * ev);

    CHECK(cost == doctest::Approx(expect).epsilon(1e-10));
    CHECK(states.back().x == doctest::Approx(x[0]).epsilon(1e-12));
}

TEST_CASE("solver contracts") {
    VehicleFixedParams fixed;
    const double dt = 0.02;
    TireSurfaceParams theta{2.579, 3.3852, 1.2, 1.2663, 0.192, 0.1737, 0.0518, 0.00035};

    SUBCASE("stationary reference keeps cost at or below the zero sequence") {
        MPCConfig cfg = small_cfg();
        MpcSolver solver(cfg, fixed, dt);
        VehicleState x0;
        ReferenceTrajectory ref;
        for (int k = 0; k <= cfg.h_steps; ++k) {
            ref.s.push_back(0);
            ref.x.push_back(0);
            ref.y.push_back(0);
            ref.phi.push_back(0);
            ref.v.push_back(0);
        }
        auto sol = solver.solve(theta, x0, ref, ControlInput{}, std::nullopt, 0);
        std::vector<ControlInput> zeros(static_cast<std::size_t>(cfg.h_steps));
        auto [zero_cost, zs] = solver.rollout_cost(theta, x0, zeros, ref, ControlInput{});
        CHECK(sol.cost <= zero_cost + 1e-12);
        CHECK(sol.predicted_states.front().x == x0.x);
    }
    SUBCASE("fixed seed reproduces the solution bit for bit at any worker count") {
        MPCConfig cfg = small_cfg();
        ThreadPool p1(1), p2(2), p4(4);
        MpcSolver sa(cfg, fixed, dt, nullptr, &p1);
        MpcSolver sb(cfg, fixed, dt, nullptr, &p2);
        MpcSolver sc(cfg, fixed, dt, nullptr, &p4);
        VehicleState x0;
        x0.vx = 1.0;
        auto ref = straight_ref(0.0, 1.4, cfg.h_steps, dt);
        auto s1 = sa.solve(theta, x0, ref, ControlInput{}, std::nullopt, 42);
        auto s2 = sb.solve(theta, x0, ref, ControlInput{}, std::nullopt, 42);
        auto s3 = sc.solve(theta, x0, ref, ControlInput{}, std::nullopt, 42);
        auto s4 = sa.solve(theta, x0, ref, ControlInput{}, std::nullopt, 42);
        CHECK(s1.cost == s2.cost);
        CHECK(s1.cost == s3.cost);
        CHECK(s1.cost == s4.cost);
        for (int k = 0; k < cfg.h_steps; ++k) {
            CHECK(s1.inputs[k].d == s2.inputs[k].d);
            CHECK(s1.inputs[k].ddelta == s3.inputs[k].ddelta);
        }
    }
    SUBCASE("more sampler iterations never hurt") {
        // iteration i's candidates do not depend on the total count, so the
        // best cost after k iterations is the k-iteration solve
        VehicleState x0;
        x0.vx = 1.0;
        x0.y = 0.15;
        auto ref = straight_ref(0.0, 1.4, 8, dt);
        double prev = std::numeric_limits<double>::infinity();
        for (int iters = 1; iters <= 4; ++iters) {
            MPCConfig cfg = small_cfg();
            cfg.iterations = iters;
            MpcSolver solver(cfg, fixed, dt);
            auto sol = solver.solve(theta, x0, ref, ControlInput{}, std::nullopt, 3);
            CHECK(sol.cost <= prev + 1e-12);
            prev = sol.cost;
        }
    }
    SUBCASE("candidate-set dominance and input bounds on random instances") {
        for (int trial = 0; trial < 40; ++trial) {
            MPCConfig cfg = small_cfg(4 + static_cast<int>(rng::uniform(rng::mix(7, trial), 0, 8)));
            cfg.samples = 8;
            cfg.iterations = 1 + trial % 3;
            MpcSolver solver(cfg, fixed, dt);
            VehicleState x0;
            x0.vx = rng::uniform(rng::mix(8, trial), 0.3, 2.5);
            x0.vy = rng::uniform(rng::mix(9, trial), -0.2, 0.2);
            x0.omega = rng::uniform(rng::mix(10, trial), -3, 3);
            x0.delta = rng::uniform(rng::mix(11, trial), -0.3, 0.3);
            auto ref = straight_ref(0.0, rng::uniform(rng::mix(12, trial), 0.5, 2.0), cfg.h_steps, dt);

            std::optional<Solution> warm;
            if (trial % 2 == 1) {
                Solution w;
                w.inputs.assign(static_cast<std::size_t>(cfg.h_steps), ControlInput{0.2, 0.01});
                warm = w;
            }
            ControlInput prev{0.1, 0.0};
            auto sol = solver.solve(theta, x0, ref, prev, warm, 1000 + trial);

            std::vector<ControlInput> zeros(static_cast<std::size_t>(cfg.h_steps));
            std::vector<ControlInput> shifted = zeros;
            if (warm) {
                for (int k = 0; k + 1 < cfg.h_steps; ++k) shifted[k] = warm->inputs[k + 1];
                shifted[cfg.h_steps - 1] = warm->inputs.back();
            }
            auto [zc, zst] = solver.rollout_cost(theta, x0, zeros, ref, prev);
            auto [sc2, sst] = solver.rollout_cost(theta, x0, shifted, ref, prev);
            CHECK(sol.cost <= zc + 1e-12);
            CHECK(sol.cost <= sc2 + 1e-12);
            for (const auto& u : sol.inputs) {
                CHECK(u.d >= fixed.d_min);
                CHECK(u.d <= fixed.d_max);
                CHECK(std::abs(u.ddelta) <= fixed.ddelta_max);
            }
        }
    }
    SUBCASE("config validation") {
        MPCConfig cfg = small_cfg();
        cfg.samples = 0;
        CHECK_THROWS_AS(MpcSolver(cfg, fixed, dt), ValidationError);
        cfg = small_cfg();
        cfg.elites = 100;
        CHECK_THROWS_AS(MpcSolver(cfg, fixed, dt), ValidationError);
        cfg = small_cfg();
        cfg.q_pos = -1.0;
        CHECK_THROWS_AS(MpcSolver(cfg, fixed, dt), ValidationError);
    }
}

TEST_CASE("oracle step") {
    VehicleFixedParams fixed;
    const double dt = 0.02;
    TireSurfaceParams theta{2.579, 3.3852, 1.2, 1.2663, 0.192, 0.1737, 0.0518, 0.00035};
    MPCConfig cfg = small_cfg();
    MpcSolver solver(cfg, fixed, dt);

    ParamSchedule constant;
    constant.theta_0 = theta;

    VehicleState x0;
    x0.vx = 1.2;
    auto ref = straight_ref(0.0, 1.3, cfg.h_steps, dt);

    auto direct = solver.solve(theta, x0, ref, ControlInput{}, std::nullopt, 5);
    auto via_oracle = solver.oracle_step(constant, 3.0, 1, 2.0, x0, ref, ControlInput{}, std::nullopt, 5);
    CHECK(direct.cost == via_oracle.cost);
    CHECK(direct.inputs[0].d == via_oracle.inputs[0].d);

    auto again = solver.oracle_step(constant, 3.0, 1, 2.0, x0, ref, ControlInput{}, std::nullopt, 5);
    CHECK(via_oracle.cost == again.cost);
}

TEST_CASE("closed loop on a circle with the true model holds the raceline") {
    ScenarioConfig cfg;
    cfg.track.kind = "circle";
    cfg.run.controller = Controller::oracle;  // true model at every step
    cfg.run.laps = 2;
    cfg.run.max_time = 20.0;
    cfg.run.threads = 2;
    cfg.planner.limits = SpeedLimits{};  // reference inside the grip envelope
    auto result = run_scenario(cfg);
    REQUIRE(result.metrics.completed);
    double worst = 0.0;
    for (const auto& rec : result.trace.records)
        if (rec.t > 2.0) worst = std::max(worst, rec.deviation);
    CHECK(worst <= 0.05);
}
