#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lla/harness.hpp"
#include "lla/rng.hpp"

namespace lla {

using nlohmann::json;

Controller controller_from_string(const std::string& name) {
    if (name == "lla") return Controller::lla;
    if (name == "oracle") return Controller::oracle;
    if (name == "fixed" || name == "fixed_nominal") return Controller::fixed_nominal;
    throw ConfigError("unknown controller: " + name);
}

std::string to_string(Controller c) {
    switch (c) {
        case Controller::lla: return "lla";
        case Controller::oracle: return "oracle";
        case Controller::fixed_nominal: return "fixed_nominal";
    }
    return "?";
}

int ScenarioConfig::window_steps() const {
    double ratio = bank.window_s / run.dt;
    return static_cast<int>(std::lround(ratio));
}

void ScenarioConfig::validate() const {
    if (!(run.dt > 0.0)) throw ConfigError("run.dt must be positive");
    if (run.laps < 1) throw ConfigError("run.laps must be at least 1");
    if (!(run.max_time > 0.0)) throw ConfigError("run.max_time must be positive");
    if (run.plant_substeps < 1) throw ConfigError("run.plant_substeps must be at least 1");
    if (!(run.divergence_widths > 0.0)) throw ConfigError("run.divergence_widths must be positive");

    double ratio = bank.window_s / run.dt;
    int w = static_cast<int>(std::lround(ratio));
    if (w < 1 || std::abs(ratio - w) > 1e-6)
        throw ConfigError("bank.window_s must be a positive integer multiple of run.dt");

    if (bank.n < 1) throw ConfigError("bank.n must be at least 1");
    if (!(bank.range_fraction > 0.0)) throw ConfigError("bank.range_fraction must be positive");
    for (double wgt : bank.weights)
        if (wgt < 0.0) throw ConfigError("bank.weights must be non-negative");
    if (bank.distribution != "uniform" && bank.distribution != "gaussian")
        throw ConfigError("bank.distribution must be uniform or gaussian");

    if (!(estimator.gamma > 0.0) || estimator.gamma > 1.0)
        throw ConfigError("estimator.gamma must be in (0, 1]");
    if (!(estimator.mu_init > 0.0)) throw ConfigError("estimator.mu_init must be positive");

    if (!(planner.mu_min > 0.0) || !(planner.mu_min < planner.mu_max))
        throw ConfigError("planner needs 0 < mu_min < mu_max");
    if (planner.n_profiles < 2) throw ConfigError("planner.n_profiles must be at least 2");
    if (planner.raceline_iters < 0) throw ConfigError("planner.raceline_iters must be >= 0");

    if (schedule.kind != "constant" && schedule.kind != "linear_decay" && schedule.kind != "step_drop")
        throw ConfigError("schedule.kind must be constant, linear_decay or step_drop");
    if (schedule.kind == "step_drop" &&
        !(schedule.drop_fraction > 0.0 && schedule.drop_fraction < 1.0))
        throw ConfigError("schedule.drop_fraction must be in (0, 1)");
    if (schedule.trigger != "time" && schedule.trigger != "lap" && schedule.trigger != "position")
        throw ConfigError("schedule.trigger must be time, lap or position");

    if (!(vehicle.m > 0.0) || !(vehicle.i_z > 0.0) || !(vehicle.l_f > 0.0) || !(vehicle.l_r > 0.0))
        throw ConfigError("vehicle m, i_z, l_f, l_r must be positive");
    if (!(vehicle.d_min < vehicle.d_max)) throw ConfigError("vehicle duty bounds are inverted");

    for (int e = 0; e < 6; ++e)
        if (!(theta0.entry(e) > 0.0)) throw ConfigError("theta0 Pacejka entries must be positive");
    if (theta0.c_ro < 0.0 || theta0.c_d < 0.0) throw ConfigError("theta0 resistances must be >= 0");

    mpc.validate();
}

ScenarioConfig default_config() { return ScenarioConfig{}; }

namespace {

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> known) {
    std::set<std::string> allowed(known.begin(), known.end());
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (allowed.find(it.key()) == allowed.end())
            throw ConfigError("unknown key '" + it.key() + "' in config section '" + section + "'");
    }
}

template <typename T>
void get(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ScenarioConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    ScenarioConfig cfg;
    check_keys(j, "<top>", {"track", "vehicle", "theta0", "schedule", "bank", "estimator", "planner",
                            "mpc", "run", "output"});

    if (j.contains("track")) {
        const auto& t = j["track"];
        check_keys(t, "track", {"source", "kind", "scale", "n_points", "file"});
        get(t, "source", cfg.track.source);
        get(t, "kind", cfg.track.kind);
        get(t, "scale", cfg.track.scale);
        get(t, "n_points", cfg.track.n_points);
        get(t, "file", cfg.track.file);
    }
    if (j.contains("vehicle")) {
        const auto& v = j["vehicle"];
        check_keys(v, "vehicle",
                   {"m", "i_z", "l_f", "l_r", "g", "c_m1", "c_m2", "delta_max", "d_min", "d_max",
                    "ddelta_max", "vx_floor"});
        get(v, "m", cfg.vehicle.m);
        get(v, "i_z", cfg.vehicle.i_z);
        get(v, "l_f", cfg.vehicle.l_f);
        get(v, "l_r", cfg.vehicle.l_r);
        get(v, "g", cfg.vehicle.g);
        get(v, "c_m1", cfg.vehicle.c_m1);
        get(v, "c_m2", cfg.vehicle.c_m2);
        get(v, "delta_max", cfg.vehicle.delta_max);
        get(v, "d_min", cfg.vehicle.d_min);
        get(v, "d_max", cfg.vehicle.d_max);
        get(v, "ddelta_max", cfg.vehicle.ddelta_max);
        get(v, "vx_floor", cfg.vehicle.vx_floor);
    }
    if (j.contains("theta0")) {
        const auto& t = j["theta0"];
        check_keys(t, "theta0", {"b_f", "b_r", "c_f", "c_r", "d_f", "d_r", "c_ro", "c_d"});
        get(t, "b_f", cfg.theta0.b_f);
        get(t, "b_r", cfg.theta0.b_r);
        get(t, "c_f", cfg.theta0.c_f);
        get(t, "c_r", cfg.theta0.c_r);
        get(t, "d_f", cfg.theta0.d_f);
        get(t, "d_r", cfg.theta0.d_r);
        get(t, "c_ro", cfg.theta0.c_ro);
        get(t, "c_d", cfg.theta0.c_d);
    }
    if (j.contains("schedule")) {
        const auto& s = j["schedule"];
        check_keys(s, "schedule",
                   {"kind", "decay_rate", "drop_fraction", "trigger", "trigger_time", "trigger_lap",
                    "trigger_progress_frac", "co_scale_bc"});
        get(s, "kind", cfg.schedule.kind);
        get(s, "decay_rate", cfg.schedule.decay_rate);
        get(s, "drop_fraction", cfg.schedule.drop_fraction);
        get(s, "trigger", cfg.schedule.trigger);
        get(s, "trigger_time", cfg.schedule.trigger_time);
        get(s, "trigger_lap", cfg.schedule.trigger_lap);
        get(s, "trigger_progress_frac", cfg.schedule.trigger_progress_frac);
        get(s, "co_scale_bc", cfg.schedule.co_scale_bc);
    }
    if (j.contains("bank")) {
        const auto& b = j["bank"];
        check_keys(b, "bank", {"n", "range_fraction", "seed", "window_s", "weights", "distribution"});
        get(b, "n", cfg.bank.n);
        get(b, "range_fraction", cfg.bank.range_fraction);
        get(b, "seed", cfg.bank.seed);
        get(b, "window_s", cfg.bank.window_s);
        get(b, "distribution", cfg.bank.distribution);
        if (b.contains("weights")) {
            auto w = b.at("weights").get<std::vector<double>>();
            if (w.size() != 7) throw ConfigError("bank.weights must have 7 entries");
            std::copy(w.begin(), w.end(), cfg.bank.weights.begin());
        }
    }
    if (j.contains("estimator")) {
        const auto& e = j["estimator"];
        check_keys(e, "estimator", {"gamma", "mu_init"});
        get(e, "gamma", cfg.estimator.gamma);
        get(e, "mu_init", cfg.estimator.mu_init);
    }
    if (j.contains("planner")) {
        const auto& p = j["planner"];
        check_keys(p, "planner",
                   {"mu_min", "mu_max", "n_profiles", "a_acc_scale", "a_brake_scale", "a_lat_scale",
                    "v_max", "kappa_min", "margin", "raceline_iters", "raceline_step"});
        get(p, "mu_min", cfg.planner.mu_min);
        get(p, "mu_max", cfg.planner.mu_max);
        get(p, "n_profiles", cfg.planner.n_profiles);
        get(p, "a_acc_scale", cfg.planner.limits.a_acc_scale);
        get(p, "a_brake_scale", cfg.planner.limits.a_brake_scale);
        get(p, "a_lat_scale", cfg.planner.limits.a_lat_scale);
        get(p, "v_max", cfg.planner.limits.v_max);
        get(p, "kappa_min", cfg.planner.limits.kappa_min);
        get(p, "margin", cfg.planner.margin);
        get(p, "raceline_iters", cfg.planner.raceline_iters);
        get(p, "raceline_step", cfg.planner.raceline_step);
    }
    if (j.contains("mpc")) {
        const auto& m = j["mpc"];
        check_keys(m, "mpc",
                   {"h_steps", "q_pos", "q_phi", "q_v", "r_d", "r_ddelta", "r_rate", "terminal_scale",
                    "boundary_weight", "boundary_margin", "samples", "elites", "iterations", "noise_d",
                    "noise_ddelta", "noise_decay", "seed"});
        get(m, "h_steps", cfg.mpc.h_steps);
        get(m, "q_pos", cfg.mpc.q_pos);
        get(m, "q_phi", cfg.mpc.q_phi);
        get(m, "q_v", cfg.mpc.q_v);
        get(m, "r_d", cfg.mpc.r_d);
        get(m, "r_ddelta", cfg.mpc.r_ddelta);
        get(m, "r_rate", cfg.mpc.r_rate);
        get(m, "terminal_scale", cfg.mpc.terminal_scale);
        get(m, "boundary_weight", cfg.mpc.boundary_weight);
        get(m, "boundary_margin", cfg.mpc.boundary_margin);
        get(m, "samples", cfg.mpc.samples);
        get(m, "elites", cfg.mpc.elites);
        get(m, "iterations", cfg.mpc.iterations);
        get(m, "noise_d", cfg.mpc.noise_d);
        get(m, "noise_ddelta", cfg.mpc.noise_ddelta);
        get(m, "noise_decay", cfg.mpc.noise_decay);
        get(m, "seed", cfg.mpc.seed);
    }
    if (j.contains("run")) {
        const auto& r = j["run"];
        check_keys(r, "run",
                   {"dt", "laps", "max_time", "controller", "initial_speed", "threads",
                    "divergence_widths", "plant_substeps"});
        get(r, "dt", cfg.run.dt);
        get(r, "laps", cfg.run.laps);
        get(r, "max_time", cfg.run.max_time);
        if (r.contains("controller")) cfg.run.controller = controller_from_string(r.at("controller").get<std::string>());
        get(r, "initial_speed", cfg.run.initial_speed);
        get(r, "threads", cfg.run.threads);
        get(r, "divergence_widths", cfg.run.divergence_widths);
        get(r, "plant_substeps", cfg.run.plant_substeps);
    }
    if (j.contains("output")) {
        const auto& o = j["output"];
        check_keys(o, "output", {"dir", "write_trace", "dump_bank"});
        get(o, "dir", cfg.output.dir);
        get(o, "write_trace", cfg.output.write_trace);
        get(o, "dump_bank", cfg.output.dump_bank);
    }

    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_json(ss.str());
}

std::string config_to_json(const ScenarioConfig& cfg) {
    json j;
    j["track"] = {{"source", cfg.track.source}, {"kind", cfg.track.kind},  {"scale", cfg.track.scale},
                  {"n_points", cfg.track.n_points}, {"file", cfg.track.file}};
    j["vehicle"] = {{"m", cfg.vehicle.m},       {"i_z", cfg.vehicle.i_z},
                    {"l_f", cfg.vehicle.l_f},   {"l_r", cfg.vehicle.l_r},
                    {"g", cfg.vehicle.g},       {"c_m1", cfg.vehicle.c_m1},
                    {"c_m2", cfg.vehicle.c_m2}, {"delta_max", cfg.vehicle.delta_max},
                    {"d_min", cfg.vehicle.d_min}, {"d_max", cfg.vehicle.d_max},
                    {"ddelta_max", cfg.vehicle.ddelta_max}, {"vx_floor", cfg.vehicle.vx_floor}};
    j["theta0"] = {{"b_f", cfg.theta0.b_f}, {"b_r", cfg.theta0.b_r}, {"c_f", cfg.theta0.c_f},
                   {"c_r", cfg.theta0.c_r}, {"d_f", cfg.theta0.d_f}, {"d_r", cfg.theta0.d_r},
                   {"c_ro", cfg.theta0.c_ro}, {"c_d", cfg.theta0.c_d}};
    j["schedule"] = {{"kind", cfg.schedule.kind},
                     {"decay_rate", cfg.schedule.decay_rate},
                     {"drop_fraction", cfg.schedule.drop_fraction},
                     {"trigger", cfg.schedule.trigger},
                     {"trigger_time", cfg.schedule.trigger_time},
                     {"trigger_lap", cfg.schedule.trigger_lap},
                     {"trigger_progress_frac", cfg.schedule.trigger_progress_frac},
                     {"co_scale_bc", cfg.schedule.co_scale_bc}};
    j["bank"] = {{"n", cfg.bank.n},
                 {"range_fraction", cfg.bank.range_fraction},
                 {"seed", cfg.bank.seed},
                 {"window_s", cfg.bank.window_s},
                 {"weights", std::vector<double>(cfg.bank.weights.begin(), cfg.bank.weights.end())},
                 {"distribution", cfg.bank.distribution}};
    j["estimator"] = {{"gamma", cfg.estimator.gamma}, {"mu_init", cfg.estimator.mu_init}};
    j["planner"] = {{"mu_min", cfg.planner.mu_min},
                    {"mu_max", cfg.planner.mu_max},
                    {"n_profiles", cfg.planner.n_profiles},
                    {"a_acc_scale", cfg.planner.limits.a_acc_scale},
                    {"a_brake_scale", cfg.planner.limits.a_brake_scale},
                    {"a_lat_scale", cfg.planner.limits.a_lat_scale},
                    {"v_max", cfg.planner.limits.v_max},
                    {"kappa_min", cfg.planner.limits.kappa_min},
                    {"margin", cfg.planner.margin},
                    {"raceline_iters", cfg.planner.raceline_iters},
                    {"raceline_step", cfg.planner.raceline_step}};
    j["mpc"] = {{"h_steps", cfg.mpc.h_steps},
                {"q_pos", cfg.mpc.q_pos},
                {"q_phi", cfg.mpc.q_phi},
                {"q_v", cfg.mpc.q_v},
                {"r_d", cfg.mpc.r_d},
                {"r_ddelta", cfg.mpc.r_ddelta},
                {"r_rate", cfg.mpc.r_rate},
                {"terminal_scale", cfg.mpc.terminal_scale},
                {"boundary_weight", cfg.mpc.boundary_weight},
                {"boundary_margin", cfg.mpc.boundary_margin},
                {"samples", cfg.mpc.samples},
                {"elites", cfg.mpc.elites},
                {"iterations", cfg.mpc.iterations},
                {"noise_d", cfg.mpc.noise_d},
                {"noise_ddelta", cfg.mpc.noise_ddelta},
                {"noise_decay", cfg.mpc.noise_decay},
                {"seed", cfg.mpc.seed}};
    j["run"] = {{"dt", cfg.run.dt},
                {"laps", cfg.run.laps},
                {"max_time", cfg.run.max_time},
                {"controller", to_string(cfg.run.controller)},
                {"initial_speed", cfg.run.initial_speed},
                {"threads", cfg.run.threads},
                {"divergence_widths", cfg.run.divergence_widths},
                {"plant_substeps", cfg.run.plant_substeps}};
    j["output"] = {{"dir", cfg.output.dir},
                   {"write_trace", cfg.output.write_trace},
                   {"dump_bank", cfg.output.dump_bank}};
    return j.dump(2) + "\n";
}

void apply_preset(ScenarioConfig& cfg, const std::string& preset) {
    if (preset == "exp1") {
        cfg.schedule.kind = "linear_decay";
        cfg.schedule.decay_rate = 0.02;
    } else if (preset == "exp2") {
        cfg.schedule.kind = "step_drop";
        cfg.schedule.drop_fraction = 0.4;
        cfg.schedule.trigger = "lap";
        cfg.schedule.trigger_lap = 1;
    } else if (preset == "exp3") {
        cfg.schedule.kind = "step_drop";
        cfg.schedule.drop_fraction = 0.4;
        cfg.schedule.trigger = "position";
        cfg.schedule.trigger_progress_frac = 0.5;
    } else {
        throw ConfigError("unknown preset: " + preset + " (expected exp1, exp2 or exp3)");
    }
}

void apply_master_seed(ScenarioConfig& cfg, std::uint64_t seed) {
    cfg.bank.seed = rng::mix(seed, 0xBA17Cull);
    cfg.mpc.seed = rng::mix(seed, 0x3A3Dull);
}

}  // namespace lla
