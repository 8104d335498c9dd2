// Command-line front end: closed-loop runs, bank-size / window sweeps and
// metric recomputation from dumped traces.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lla/harness.hpp"
#include "lla/io.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t end = s.find(sep, start);
        if (end == std::string::npos) {
            parts.push_back(s.substr(start));
            break;
        }
        parts.push_back(s.substr(start, end - start));
        start = end + 1;
    }
    return parts;
}

std::vector<std::uint64_t> seed_list(int count) {
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < count; ++i) seeds.push_back(static_cast<std::uint64_t>(i) + 1);
    return seeds;
}

void dump_library_csv(const lla::RaceLine& rl, const lla::VelocityProfileLibrary& lib,
                      const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (f == nullptr) throw std::runtime_error("cannot write library file: " + path);
    std::fprintf(f, "s,kappa");
    for (double mu : lib.mu_grid) std::fprintf(f, ",v_mu%g", mu);
    std::fprintf(f, "\n");
    for (std::size_t i = 0; i < rl.size(); ++i) {
        std::fprintf(f, "%.17g,%.17g", rl.s[i], rl.curvature[i]);
        for (const auto& profile : lib.profiles) std::fprintf(f, ",%.17g", profile[i]);
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

int cmd_run(const std::string& config_path, const std::string& controller, const std::string& preset,
            std::uint64_t seed, bool seed_set, const std::string& out_dir,
            const std::string& dump_track_path, const std::string& dump_library_path) {
    lla::ScenarioConfig cfg =
        config_path.empty() ? lla::default_config() : lla::load_config(config_path);
    if (!controller.empty()) cfg.run.controller = lla::controller_from_string(controller);
    if (!preset.empty()) lla::apply_preset(cfg, preset);
    if (seed_set) lla::apply_master_seed(cfg, seed);
    if (!out_dir.empty()) cfg.output.dir = out_dir;
    cfg.validate();

    if (!dump_track_path.empty()) {
        lla::dump_track_csv(lla::build_track(cfg.track), dump_track_path);
        std::printf("track written to %s\n", dump_track_path.c_str());
    }

    lla::RunResult result = lla::run_scenario(cfg);

    if (!dump_library_path.empty()) {
        auto lib = lla::build_library(result.raceline, cfg.planner.mu_min, cfg.planner.mu_max,
                                      cfg.planner.n_profiles, cfg.planner.limits);
        dump_library_csv(result.raceline, lib, dump_library_path);
        std::printf("velocity-profile library written to %s\n", dump_library_path.c_str());
    }

    if (!cfg.output.dir.empty()) {
        fs::create_directories(cfg.output.dir);
        const fs::path dir(cfg.output.dir);
        if (cfg.output.write_trace) lla::write_trace_csv(result.trace, (dir / "trace.csv").string());
        lla::write_metrics_json(result.metrics, (dir / "metrics.json").string());
        lla::write_timing_json(result.metrics, (dir / "timing.json").string());
        if (cfg.output.dump_bank && cfg.run.controller == lla::Controller::lla) {
            auto bank = lla::sample_bank(cfg.theta0, cfg.bank.range_fraction, cfg.bank.n,
                                         cfg.bank.seed,
                                         cfg.bank.distribution == "gaussian"
                                             ? lla::BankDistribution::gaussian
                                             : lla::BankDistribution::uniform);
            lla::dump_bank(bank, (dir / "bank.csv").string());
        }
        std::printf("outputs written to %s\n", cfg.output.dir.c_str());
    }

    const lla::Metrics& m = result.metrics;
    std::printf("controller=%s completed=%s laps=%d sim_time=%.3fs\n",
                lla::to_string(cfg.run.controller).c_str(), m.completed ? "yes" : "no",
                m.laps_completed, m.sim_time);
    for (std::size_t i = 0; i < m.lap_times.size(); ++i)
        std::printf("lap %zu time: %.3f s\n", i + 1, m.lap_times[i]);
    std::printf("violation_time=%.3fs mean_deviation=%.4fm total_mpc_cost=%.3f avg_compute=%.4fs\n",
                m.violation_time, m.mean_deviation, m.total_mpc_cost, m.avg_compute_time);

    return m.completed ? 0 : 2;
}

int cmd_sweep_n(const std::string& config_path, const std::string& n_csv, int n_seeds) {
    lla::ScenarioConfig cfg =
        config_path.empty() ? lla::default_config() : lla::load_config(config_path);
    std::vector<int> n_list;
    for (const auto& tok : split(n_csv, ',')) n_list.push_back(std::stoi(tok));

    auto rows = lla::sweep_bank_size(cfg, n_list, seed_list(n_seeds));
    std::printf("%-10s %-16s\n", "N", "median_cost");
    for (const auto& row : rows) std::printf("%-10.0f %-16.6g\n", row.value, row.median_cost);
    return 0;
}

int cmd_sweep_w(const std::string& config_path, const std::string& w_csv, int n_seeds) {
    lla::ScenarioConfig cfg =
        config_path.empty() ? lla::default_config() : lla::load_config(config_path);
    std::vector<double> w_list;
    for (const auto& tok : split(w_csv, ',')) w_list.push_back(std::stod(tok));

    auto rows = lla::sweep_window(cfg, w_list, seed_list(n_seeds));
    std::printf("%-10s %-16s\n", "W_s", "median_cost");
    for (const auto& row : rows) std::printf("%-10.3g %-16.6g\n", row.value, row.median_cost);
    return 0;
}

int cmd_metrics(const std::string& trace_path, const std::string& config_path,
                const std::string& out_path) {
    lla::ScenarioConfig cfg =
        config_path.empty() ? lla::default_config() : lla::load_config(config_path);
    lla::RunTrace trace = lla::read_trace_csv(trace_path);
    lla::Track track = lla::build_track(cfg.track);
    lla::RaceLine raceline = lla::min_curvature_raceline(track, cfg.planner.margin,
                                                         cfg.planner.raceline_iters,
                                                         cfg.planner.raceline_step);
    lla::Metrics m = lla::compute_metrics(trace, track, raceline, cfg.run.laps);
    std::string json = lla::metrics_to_json(m);
    std::fputs(json.c_str(), stdout);
    if (!out_path.empty()) lla::write_text_file(out_path, json);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive-MPC racing simulator: model-bank identification, friction-adaptive "
                 "planning and sampling-based receding-horizon control"};
    app.require_subcommand(1);

    std::string config_path, controller, preset, out_dir, dump_track_path, dump_library_path;
    std::uint64_t seed = 0;

    auto* run = app.add_subcommand("run", "Run one closed-loop scenario");
    run->add_option("--config", config_path, "Scenario config JSON");
    run->add_option("--controller", controller, "lla | oracle | fixed");
    run->add_option("--preset", preset, "exp1 | exp2 | exp3");
    auto* seed_opt = run->add_option("--seed", seed, "Master seed (derives bank and MPC seeds)");
    run->add_option("--out", out_dir, "Output directory (trace.csv, metrics.json, timing.json)");
    run->add_option("--dump-track", dump_track_path, "Write the resolved track CSV and continue");
    run->add_option("--dump-library", dump_library_path, "Write the velocity-profile library CSV");

    std::string n_csv = "200,2000,20000", w_csv = "0.02,0.1,0.2,1.0,2.0";
    int n_seeds = 5;
    auto* sweep_n = app.add_subcommand("sweep-n", "Bank-size sweep (exp1 schedule)");
    sweep_n->add_option("--config", config_path, "Scenario config JSON");
    sweep_n->add_option("--n", n_csv, "Comma-separated bank sizes");
    sweep_n->add_option("--seeds", n_seeds, "Number of seeds");

    auto* sweep_w = app.add_subcommand("sweep-w", "Look-back window sweep (exp2 schedule)");
    sweep_w->add_option("--config", config_path, "Scenario config JSON");
    sweep_w->add_option("--w", w_csv, "Comma-separated window lengths in seconds");
    sweep_w->add_option("--seeds", n_seeds, "Number of seeds");

    std::string trace_path, metrics_out;
    auto* metrics = app.add_subcommand("metrics", "Recompute metrics from a trace CSV");
    metrics->add_option("--trace", trace_path, "Trace CSV")->required();
    metrics->add_option("--config", config_path, "Scenario config JSON (track/raceline rebuild)");
    metrics->add_option("--out", metrics_out, "Write metrics JSON here as well");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(config_path, controller, preset, seed, seed_opt->count() > 0, out_dir,
                           dump_track_path, dump_library_path);
        if (sweep_n->parsed()) return cmd_sweep_n(config_path, n_csv, n_seeds);
        if (sweep_w->parsed()) return cmd_sweep_w(config_path, w_csv, n_seeds);
        if (metrics->parsed()) return cmd_metrics(trace_path, config_path, metrics_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
