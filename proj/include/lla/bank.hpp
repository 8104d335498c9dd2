#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "lla/dynamics.hpp"
#include "lla/parallel.hpp"

namespace lla {

enum class BankDistribution { uniform, gaussian };

// N parameter vectors sampled around a nominal model. Immutable once built.
struct ModelBank {
    std::vector<TireSurfaceParams> thetas;
    TireSurfaceParams bounds_lo;
    TireSurfaceParams bounds_hi;
    TireSurfaceParams nominal;
    std::uint64_t seed = 0;
    int structure_tag = 0;  // single dynamic-bicycle structure

    int size() const { return static_cast<int>(thetas.size()); }
};

ModelBank sample_bank(const TireSurfaceParams& nominal, double range_fraction, int n,
                      std::uint64_t seed, BankDistribution dist = BankDistribution::uniform);

// Per-model squared error assigned when a prediction leaves the finite
// domain; large enough to always lose the argmin, small enough to keep the
// rolling sums finite.
constexpr double kDivergedErrorSentinel = 1e12;

using StateWeights = std::array<double, 7>;

constexpr StateWeights kDefaultStateWeights = {1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};

// Rolling window of per-model one-step squared errors with O(N) running
// sums (add newest, subtract oldest).
class ErrorWindow {
  public:
    ErrorWindow(int window_steps, int n_models, StateWeights weights = kDefaultStateWeights);

    int window_steps() const { return window_steps_; }
    int n_models() const { return n_models_; }
    long steps_seen() const { return steps_seen_; }
    bool warm() const { return steps_seen_ >= window_steps_; }
    const std::vector<double>& rolling_sums() const { return rolling_sum_; }
    const StateWeights& weights() const { return weights_; }

    // Pushes the errors between the measurement and each model's prediction.
    void update(const VehicleState& measured, std::span<const VehicleState> predictions,
                ThreadPool* pool = nullptr);

    // Recomputes the window sums from the ring; used to audit the rolling
    // update against drift.
    std::vector<double> naive_sums() const;

  private:
    int window_steps_;
    int n_models_;
    std::vector<double> ring_;  // window_steps x n_models, row-major
    std::vector<double> rolling_sum_;
    int head_ = 0;
    long steps_seen_ = 0;
    StateWeights weights_;
};

// Weighted squared one-step error with the heading difference taken on the
// circle. Non-finite predictions map to the sentinel.
double prediction_error(const VehicleState& measured, const VehicleState& predicted,
                        const StateWeights& weights);

// Single-RK4-step prediction of every bank model from (x_prev, u_prev).
// Results are bit-identical for any worker count.
void predict_all(const ModelBank& bank, const VehicleFixedParams& fixed, const VehicleState& x_prev,
                 const ControlInput& u_prev, double dt, std::span<VehicleState> out,
                 ThreadPool* pool = nullptr);

// Argmin over the rolling sums; lowest index wins ties. Requires a warm
// window (callers use the nominal model before that).
int select_best(const ErrorWindow& window);

void dump_bank(const ModelBank& bank, const std::string& path);

}  // namespace lla
