#include "lla/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

namespace lla {

Track build_track(const TrackSourceConfig& cfg) {
    if (cfg.source == "file") {
        if (cfg.file.empty()) throw ConfigError("track.source is 'file' but track.file is empty");
        return load_track(cfg.file);
    }
    if (cfg.source == "synthetic") {
        return generate_synthetic_track(synthetic_kind_from_string(cfg.kind), cfg.scale, cfg.n_points);
    }
    throw ConfigError("track.source must be 'synthetic' or 'file'");
}

ParamSchedule resolve_schedule(const ScheduleSpec& spec, const TireSurfaceParams& theta0,
                               double track_length) {
    ParamSchedule s;
    s.theta_0 = theta0;
    if (spec.kind == "constant") s.kind = ScheduleKind::constant;
    else if (spec.kind == "linear_decay") s.kind = ScheduleKind::linear_decay;
    else if (spec.kind == "step_drop") s.kind = ScheduleKind::step_drop;
    else throw ConfigError("unknown schedule kind: " + spec.kind);

    s.decay_rate = spec.decay_rate;
    s.drop_fraction = spec.drop_fraction;
    if (spec.trigger == "time") s.trigger = DropTrigger::time;
    else if (spec.trigger == "lap") s.trigger = DropTrigger::lap;
    else if (spec.trigger == "position") s.trigger = DropTrigger::position;
    else throw ConfigError("unknown schedule trigger: " + spec.trigger);

    s.trigger_time = spec.trigger_time;
    s.trigger_lap = spec.trigger_lap;
    s.trigger_progress = spec.trigger_progress_frac * track_length;
    s.co_scale_bc = spec.co_scale_bc;
    return s;
}

namespace {

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();

    RunResult out;
    out.track = build_track(cfg.track);
    out.raceline = min_curvature_raceline(out.track, cfg.planner.margin, cfg.planner.raceline_iters,
                                          cfg.planner.raceline_step);
    const VelocityProfileLibrary library = build_library(
        out.raceline, cfg.planner.mu_min, cfg.planner.mu_max, cfg.planner.n_profiles, cfg.planner.limits);

    ThreadPool pool(cfg.run.threads);
    const ParamSchedule schedule = resolve_schedule(cfg.schedule, cfg.theta0, out.track.length);
    const double dt = cfg.run.dt;
    const double track_len = out.track.length;

    ModelBank bank;
    std::optional<ErrorWindow> window;
    std::vector<VehicleState> predictions;
    const bool adaptive = cfg.run.controller == Controller::lla;
    if (adaptive) {
        const auto dist = cfg.bank.distribution == "gaussian" ? BankDistribution::gaussian
                                                              : BankDistribution::uniform;
        bank = sample_bank(cfg.theta0, cfg.bank.range_fraction, cfg.bank.n, cfg.bank.seed, dist);
        window.emplace(cfg.window_steps(), cfg.bank.n, cfg.bank.weights);
        predictions.resize(bank.thetas.size());
    }

    MpcSolver solver(cfg.mpc, cfg.vehicle, dt, &out.track, &pool);
    FrictionEstimate mu_est(cfg.estimator.gamma, cfg.estimator.mu_init);

    // Start on the raceline at s = 0, rolling forward.
    VehicleState x;
    x.x = out.raceline.points[0].x;
    x.y = out.raceline.points[0].y;
    x.phi = out.raceline.heading[0];
    x.vx = cfg.run.initial_speed;

    ControlInput prev_u;
    std::optional<Solution> warm;

    // Lap accounting runs on the same projection chain the metrics recompute
    // walks: first record global, then hinted by the previous record.
    double prev_s = project(out.track, {x.x, x.y}).s;
    double rl_hint = out.raceline.project({x.x, x.y}).s;
    int lap = 0;
    double progress = prev_s;
    bool have_record = false;
    double prev_rl_s = 0.0;

    out.trace.dt = dt;
    const long max_steps = static_cast<long>(std::ceil(cfg.run.max_time / dt));
    out.trace.records.reserve(static_cast<std::size_t>(std::min<long>(max_steps, 200000)));

    for (long k = 0; k < max_steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const TireSurfaceParams theta_true = schedule_eval(schedule, t, lap, progress);
        const double mu_true = raw_friction(theta_true.d_f, theta_true.d_r, cfg.vehicle.m, cfg.vehicle.g);

        // Controller: model selection, friction estimate, reference, MPC.
        const double tick0 = now_seconds();
        int j_star = -1;
        TireSurfaceParams theta_ctrl = cfg.theta0;
        double mu_plan = cfg.estimator.mu_init;
        switch (cfg.run.controller) {
            case Controller::lla:
                if (window->warm()) {
                    j_star = select_best(*window);
                    theta_ctrl = bank.thetas[static_cast<std::size_t>(j_star)];
                    mu_est.update(theta_ctrl.d_f, theta_ctrl.d_r, cfg.vehicle.m, cfg.vehicle.g);
                } else {
                    theta_ctrl = bank.nominal;
                }
                mu_plan = mu_est.mu;
                break;
            case Controller::oracle:
                theta_ctrl = theta_true;
                mu_plan = mu_true;
                break;
            case Controller::fixed_nominal:
                theta_ctrl = cfg.theta0;
                mu_plan = cfg.estimator.mu_init;
                break;
        }

        const ReferenceTrajectory ref =
            reference(out.raceline, library, mu_plan, x, cfg.mpc.h_steps, dt, rl_hint);
        const Solution sol = solver.solve(theta_ctrl, x, ref, prev_u, warm, static_cast<std::uint64_t>(k));
        const ControlInput u = sol.inputs.front();

        if (adaptive) predict_all(bank, cfg.vehicle, x, u, dt, predictions, &pool);
        double compute_s = now_seconds() - tick0;

        VehicleState x_next;
        try {
            x_next = plant_step(x, u, cfg.vehicle, theta_true, dt, cfg.run.plant_substeps);
        } catch (const IntegrationError&) {
            break;  // diverged; keep the partial trace
        }

        if (adaptive) {
            const double tick1 = now_seconds();
            window->update(x_next, predictions, &pool);
            compute_s += now_seconds() - tick1;
        }

        const CurvilinearPose pose = have_record
                                         ? project(out.track, {x_next.x, x_next.y}, prev_s)
                                         : project(out.track, {x_next.x, x_next.y});
        const CurvilinearPose rl_pose = have_record
                                            ? out.raceline.project({x_next.x, x_next.y}, prev_rl_s)
                                            : out.raceline.project({x_next.x, x_next.y});
        lap += lap_counter(prev_s, pose.s, track_len);
        progress = static_cast<double>(lap) * track_len + pose.s;

        const double hw_l = out.track.half_width_left_at(pose.s);
        const double hw_r = out.track.half_width_right_at(pose.s);
        const bool outside = pose.e_y > hw_l || -pose.e_y > hw_r;

        TraceRecord rec;
        rec.t = static_cast<double>(k + 1) * dt;
        rec.state = x_next;
        rec.input = u;
        rec.mu_true = mu_true;
        rec.mu_hat = mu_plan;
        rec.j_star = j_star;
        rec.s_center = pose.s;
        rec.e_y = pose.e_y;
        rec.deviation = std::abs(rl_pose.e_y);
        rec.outside = outside;
        rec.lap = lap;
        rec.mpc_cost = sol.cost;
        rec.compute_s = compute_s;
        out.trace.records.push_back(rec);

        x = x_next;
        prev_u = u;
        warm = sol;
        prev_s = pose.s;
        prev_rl_s = rl_pose.s;
        rl_hint = rl_pose.s;
        have_record = true;

        if (lap >= cfg.run.laps) break;
        if (std::abs(pose.e_y) > cfg.run.divergence_widths * (hw_l + hw_r)) break;
    }

    out.metrics = compute_metrics(out.trace, out.track, out.raceline, cfg.run.laps);
    return out;
}

Metrics compute_metrics(const RunTrace& trace, const Track& track, const RaceLine& raceline,
                        int laps_target) {
    Metrics m;
    const auto& recs = trace.records;
    m.steps = static_cast<long>(recs.size());
    if (recs.empty()) return m;

    long violation_steps = 0;
    double dev_sum = 0.0;
    double compute_sum = 0.0;
    double cost_sum = 0.0;

    std::optional<double> prev_s, prev_rl_s;
    int last_lap = 0;
    double last_cross_t = 0.0;

    for (const auto& rec : recs) {
        const CurvilinearPose pose = project(track, {rec.state.x, rec.state.y}, prev_s);
        const CurvilinearPose rl_pose = raceline.project({rec.state.x, rec.state.y}, prev_rl_s);
        prev_s = pose.s;
        prev_rl_s = rl_pose.s;

        const bool outside = pose.e_y > track.half_width_left_at(pose.s) ||
                             -pose.e_y > track.half_width_right_at(pose.s);
        if (outside) ++violation_steps;
        dev_sum += std::abs(rl_pose.e_y);
        compute_sum += rec.compute_s;
        cost_sum += rec.mpc_cost;

        if (rec.lap > last_lap) {
            m.lap_times.push_back(rec.t - last_cross_t);
            last_cross_t = rec.t;
            last_lap = rec.lap;
        }
    }

    m.violation_time = static_cast<double>(violation_steps) * trace.dt;
    m.mean_deviation = dev_sum / static_cast<double>(recs.size());
    m.avg_compute_time = compute_sum / static_cast<double>(recs.size());
    m.total_mpc_cost = cost_sum;
    m.laps_completed = recs.back().lap;
    m.completed = m.laps_completed >= laps_target;
    m.sim_time = recs.back().t;
    return m;
}

namespace {

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ScenarioConfig sweep_base(const ScenarioConfig& base, const std::string& preset) {
    ScenarioConfig cfg = base;
    cfg.run.controller = Controller::lla;
    cfg.output = OutputConfig{};
    apply_preset(cfg, preset);
    return cfg;
}

}  // namespace

std::vector<SweepRow> sweep_bank_size(const ScenarioConfig& base, const std::vector<int>& n_list,
                                      const std::vector<std::uint64_t>& seeds) {
    if (n_list.size() < 2) throw ConfigError("sweep-n needs at least 2 bank sizes");
    if (seeds.size() < 3) throw ConfigError("sweep-n needs at least 3 seeds");

    std::vector<SweepRow> rows;
    for (int n : n_list) {
        SweepRow row;
        row.value = static_cast<double>(n);
        for (std::uint64_t seed : seeds) {
            ScenarioConfig cfg = sweep_base(base, "exp1");
            cfg.bank.n = n;
            apply_master_seed(cfg, seed);
            row.costs.push_back(run_scenario(cfg).metrics.total_mpc_cost);
        }
        row.median_cost = median_of(row.costs);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<SweepRow> sweep_window(const ScenarioConfig& base, const std::vector<double>& w_list,
                                   const std::vector<std::uint64_t>& seeds) {
    if (w_list.size() < 2) throw ConfigError("sweep-w needs at least 2 window lengths");
    if (seeds.size() < 3) throw ConfigError("sweep-w needs at least 3 seeds");

    std::vector<SweepRow> rows;
    for (double w : w_list) {
        SweepRow row;
        row.value = w;
        for (std::uint64_t seed : seeds) {
            ScenarioConfig cfg = sweep_base(base, "exp2");
            cfg.bank.window_s = w;
            apply_master_seed(cfg, seed);
            row.costs.push_back(run_scenario(cfg).metrics.total_mpc_cost);
        }
        row.median_cost = median_of(row.costs);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace lla
