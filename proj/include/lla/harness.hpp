#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lla/bank.hpp"
#include "lla/dynamics.hpp"
#include "lla/estimator.hpp"
#include "lla/mpc.hpp"
#include "lla/planner.hpp"
#include "lla/track.hpp"

namespace lla {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Controller { lla, oracle, fixed_nominal };

Controller controller_from_string(const std::string& name);
std::string to_string(Controller c);

struct TrackSourceConfig {
    std::string source = "synthetic";  // synthetic | file
    std::string kind = "oval";
    double scale = 1.0;
    int n_points = 400;
    std::string file;
};

// Plant schedule before track-dependent resolution: the position trigger is
// a fraction of track length.
struct ScheduleSpec {
    std::string kind = "constant";  // constant | linear_decay | step_drop
    double decay_rate = 0.02;
    double drop_fraction = 0.4;
    std::string trigger = "lap";  // time | lap | position
    double trigger_time = 5.0;
    int trigger_lap = 1;
    double trigger_progress_frac = 0.5;  // of track length, within lap 1
    bool co_scale_bc = false;
};

struct BankConfig {
    int n = 5000;
    double range_fraction = 1.0;
    std::uint64_t seed = 1;
    double window_s = 0.2;
    StateWeights weights = kDefaultStateWeights;
    std::string distribution = "uniform";  // uniform | gaussian
};

struct EstimatorConfig {
    // Desk default: fast smoothing; the per-window selection is informative
    // enough that a slow filter just delays adaptation after sudden drops.
    double gamma = 0.15;
    double mu_init = 1.0;
};

struct PlannerConfig {
    double mu_min = 0.2;
    double mu_max = 0.6;
    int n_profiles = 9;
    // Desk defaults: lateral utilization above mu*g (the weight-normalized
    // mu understates the peak-force envelope by 2x) and braking the motor
    // can deliver.
    SpeedLimits limits{0.5, 0.45, 1.2, 3.0, 1e-3, 9.81};
    double margin = 0.08;
    int raceline_iters = 150;
    double raceline_step = 0.02;
};

struct RunConfig {
    double dt = 0.02;
    int laps = 3;
    double max_time = 60.0;
    Controller controller = Controller::lla;
    double initial_speed = 0.5;
    unsigned threads = 0;  // 0 = hardware concurrency
    double divergence_widths = 5.0;
    int plant_substeps = 4;
};

struct OutputConfig {
    std::string dir;
    bool write_trace = true;
    bool dump_bank = false;
};

struct ScenarioConfig {
    TrackSourceConfig track;
    VehicleFixedParams vehicle;
    TireSurfaceParams theta0{2.579, 3.3852, 1.2, 1.2663, 0.192, 0.1737, 0.0518, 0.00035};
    ScheduleSpec schedule;
    BankConfig bank;
    EstimatorConfig estimator;
    PlannerConfig planner;
    MPCConfig mpc;
    RunConfig run;
    OutputConfig output;

    int window_steps() const;
    void validate() const;
};

ScenarioConfig default_config();
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config_json(const std::string& text);
std::string config_to_json(const ScenarioConfig& cfg);

// exp1: gradual 2%/s decay; exp2: 40% drop after lap 1; exp3: 40% drop at
// half of lap 1.
void apply_preset(ScenarioConfig& cfg, const std::string& preset);

// Derives the bank and MPC sampling seeds from one master seed.
void apply_master_seed(ScenarioConfig& cfg, std::uint64_t seed);

// One record per plant step: the state reached, the input that produced it
// and the controller's view at that step.
struct TraceRecord {
    double t = 0.0;
    VehicleState state;
    ControlInput input;
    double mu_true = 0.0;
    double mu_hat = 0.0;
    int j_star = -1;  // -1 while the look-back window is warming up
    double s_center = 0.0;
    double e_y = 0.0;
    double deviation = 0.0;
    bool outside = false;
    int lap = 0;  // laps completed when this state was reached
    double mpc_cost = 0.0;
    double compute_s = 0.0;
};

struct RunTrace {
    double dt = 0.0;
    std::vector<TraceRecord> records;
};

struct Metrics {
    std::vector<double> lap_times;
    double violation_time = 0.0;
    double mean_deviation = 0.0;
    double avg_compute_time = 0.0;
    bool completed = false;
    double total_mpc_cost = 0.0;
    int laps_completed = 0;
    double sim_time = 0.0;
    long steps = 0;
};

struct RunResult {
    Track track;
    RaceLine raceline;
    RunTrace trace;
    Metrics metrics;
};

Track build_track(const TrackSourceConfig& cfg);

// Resolves the schedule spec against the actual track length.
ParamSchedule resolve_schedule(const ScheduleSpec& spec, const TireSurfaceParams& theta0,
                               double track_length);

RunResult run_scenario(const ScenarioConfig& cfg);

// Derives metrics from a trace: violation flags are recomputed from the
// track widths, deviations are re-projected against the raceline, lap times
// come from the lap column.
Metrics compute_metrics(const RunTrace& trace, const Track& track, const RaceLine& raceline,
                        int laps_target);

struct SweepRow {
    double value = 0.0;  // N or W
    double median_cost = 0.0;
    std::vector<double> costs;  // per seed
};

std::vector<SweepRow> sweep_bank_size(const ScenarioConfig& base, const std::vector<int>& n_list,
                                      const std::vector<std::uint64_t>& seeds);

std::vector<SweepRow> sweep_window(const ScenarioConfig& base, const std::vector<double>& w_list,
                                   const std::vector<std::uint64_t>& seeds);

}  // namespace lla
