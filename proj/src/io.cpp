#include "lla/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lla {

namespace {

constexpr const char* kTraceHeader =
    "t,x,y,phi,vx,vy,omega,delta,d,ddelta,mu_true,mu_hat,j_star,s,e_y,deviation,outside,lap,"
    "mpc_cost,compute_s";

}  // namespace

void write_trace_csv(const RunTrace& trace, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (f == nullptr) throw std::runtime_error("cannot write trace file: " + path);
    std::fprintf(f, "%s\n", kTraceHeader);
    for (const auto& r : trace.records) {
        std::fprintf(f,
                     "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,"
                     "%.17g,%.17g,%.17g,%d,%d,%.17g,%.17g\n",
                     r.t, r.state.x, r.state.y, r.state.phi, r.state.vx, r.state.vy, r.state.omega,
                     r.state.delta, r.input.d, r.input.ddelta, r.mu_true, r.mu_hat, r.j_star,
                     r.s_center, r.e_y, r.deviation, r.outside ? 1 : 0, r.lap, r.mpc_cost,
                     r.compute_s);
    }
    std::fclose(f);
}

RunTrace read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty trace file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTraceHeader) throw std::runtime_error("unexpected trace header in " + path);

    RunTrace trace;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        double v[20];
        for (int k = 0; k < 20; ++k) {
            if (!std::getline(ss, cell, ','))
                throw std::runtime_error("trace line " + std::to_string(line_no) + ": expected 20 columns");
            try {
                v[k] = std::stod(cell);
            } catch (const std::exception&) {
                throw std::runtime_error("trace line " + std::to_string(line_no) + ": bad number '" + cell + "'");
            }
        }
        TraceRecord r;
        r.t = v[0];
        r.state = {v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
        r.input = {v[8], v[9]};
        r.mu_true = v[10];
        r.mu_hat = v[11];
        r.j_star = static_cast<int>(v[12]);
        r.s_center = v[13];
        r.e_y = v[14];
        r.deviation = v[15];
        r.outside = v[16] != 0.0;
        r.lap = static_cast<int>(v[17]);
        r.mpc_cost = v[18];
        r.compute_s = v[19];
        trace.records.push_back(r);
    }
    if (!trace.records.empty()) trace.dt = trace.records.front().t;
    return trace;
}

std::string metrics_to_json(const Metrics& m) {
    nlohmann::json j;
    j["completed"] = m.completed;
    j["laps_completed"] = m.laps_completed;
    j["lap_times_s"] = m.lap_times;
    j["violation_time_s"] = m.violation_time;
    j["mean_deviation_m"] = m.mean_deviation;
    j["total_mpc_cost"] = m.total_mpc_cost;
    j["sim_time_s"] = m.sim_time;
    j["steps"] = m.steps;
    return j.dump(2) + "\n";
}

std::string timing_to_json(const Metrics& m) {
    nlohmann::json j;
    j["avg_compute_time_s"] = m.avg_compute_time;
    return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

void write_metrics_json(const Metrics& m, const std::string& path) {
    write_text_file(path, metrics_to_json(m));
}

void write_timing_json(const Metrics& m, const std::string& path) {
    write_text_file(path, timing_to_json(m));
}

}  // namespace lla
