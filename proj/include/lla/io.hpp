#pragma once

#include <string>

#include "lla/harness.hpp"

namespace lla {

void write_trace_csv(const RunTrace& trace, const std::string& path);
RunTrace read_trace_csv(const std::string& path);

// Deterministic simulation outputs only; wall-clock timing goes to the
// sidecar so metrics files are bit-identical across reruns.
std::string metrics_to_json(const Metrics& m);
std::string timing_to_json(const Metrics& m);
void write_metrics_json(const Metrics& m, const std::string& path);
void write_timing_json(const Metrics& m, const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace lla
