#include "lla/bank.hpp"

#include <cstdio>
#include <stdexcept>

#include "lla/geom.hpp"
#include "lla/rng.hpp"

namespace lla {

namespace {

// Entries must stay positive for the Pacejka factors; resistances may be 0.
constexpr double kPositiveFloor = 1e-4;

double entry_floor(int entry) {
    return entry < 6 ? kPositiveFloor : 0.0;  // b_f..d_r then c_ro, c_d
}

}  // namespace

ModelBank sample_bank(const TireSurfaceParams& nominal, double range_fraction, int n,
                      std::uint64_t seed, BankDistribution dist) {
    if (n < 1) throw std::invalid_argument("sample_bank: bank size must be at least 1");
    if (!(range_fraction > 0.0)) throw std::invalid_argument("sample_bank: range fraction must be positive");
    if (!is_finite(nominal)) throw std::invalid_argument("sample_bank: nominal parameters must be finite");

    ModelBank bank;
    bank.nominal = nominal;
    bank.seed = seed;
    for (int e = 0; e < TireSurfaceParams::n_entries; ++e) {
        double lo = nominal.entry(e) * (1.0 - range_fraction);
        double hi = nominal.entry(e) * (1.0 + range_fraction);
        bank.bounds_lo.entry(e) = std::max(lo, entry_floor(e));
        bank.bounds_hi.entry(e) = hi;
    }

    bank.thetas.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        TireSurfaceParams& theta = bank.thetas[static_cast<std::size_t>(j)];
        for (int e = 0; e < TireSurfaceParams::n_entries; ++e) {
            const double lo = bank.bounds_lo.entry(e);
            const double hi = bank.bounds_hi.entry(e);
            const std::uint64_t key = rng::mix(seed, static_cast<std::uint64_t>(j),
                                               static_cast<std::uint64_t>(e));
            double v;
            if (dist == BankDistribution::uniform) {
                v = rng::uniform(key, lo, hi);
            } else {
                // centered at nominal, sigma = half the one-sided range
                double sigma = 0.5 * range_fraction * std::abs(nominal.entry(e));
                v = nominal.entry(e) + sigma * rng::gaussian(key);
                v = std::clamp(v, lo, hi);
            }
            theta.entry(e) = v;
        }
    }
    return bank;
}

double prediction_error(const VehicleState& measured, const VehicleState& predicted,
                        const StateWeights& w) {
    if (!is_finite(predicted)) return kDivergedErrorSentinel;
    const double dx = measured.x - predicted.x;
    const double dy = measured.y - predicted.y;
    const double dphi = angle_diff(measured.phi, predicted.phi);
    const double dvx = measured.vx - predicted.vx;
    const double dvy = measured.vy - predicted.vy;
    const double domega = measured.omega - predicted.omega;
    const double ddelta = measured.delta - predicted.delta;
    double e = w[0] * dx * dx + w[1] * dy * dy + w[2] * dphi * dphi + w[3] * dvx * dvx +
               w[4] * dvy * dvy + w[5] * domega * domega + w[6] * ddelta * ddelta;
    if (!std::isfinite(e)) return kDivergedErrorSentinel;
    return e;
}

ErrorWindow::ErrorWindow(int window_steps, int n_models, StateWeights weights)
    : window_steps_(window_steps), n_models_(n_models), weights_(weights) {
    if (window_steps < 1) throw std::invalid_argument("ErrorWindow: window must span at least 1 step");
    if (n_models < 1) throw std::invalid_argument("ErrorWindow: need at least 1 model");
    ring_.assign(static_cast<std::size_t>(window_steps) * n_models, 0.0);
    rolling_sum_.assign(static_cast<std::size_t>(n_models), 0.0);
}

void ErrorWindow::update(const VehicleState& measured, std::span<const VehicleState> predictions,
                         ThreadPool* pool) {
    if (static_cast<int>(predictions.size()) != n_models_)
        throw std::invalid_argument("ErrorWindow::update: prediction count mismatch");

    double* row = ring_.data() + static_cast<std::size_t>(head_) * n_models_;
    auto body = [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            const double e = prediction_error(measured, predictions[j], weights_);
            rolling_sum_[j] += e - row[j];
            row[j] = e;
        }
    };
    if (pool != nullptr) {
        pool->parallel_for(static_cast<std::size_t>(n_models_), body);
    } else {
        body(0, static_cast<std::size_t>(n_models_));
    }
    head_ = (head_ + 1) % window_steps_;
    ++steps_seen_;
}

std::vector<double> ErrorWindow::naive_sums() const {
    std::vector<double> sums(static_cast<std::size_t>(n_models_), 0.0);
    const long rows = std::min<long>(steps_seen_, window_steps_);
    for (long r = 0; r < rows; ++r) {
        const double* row = ring_.data() + static_cast<std::size_t>(r) * n_models_;
        for (int j = 0; j < n_models_; ++j) sums[static_cast<std::size_t>(j)] += row[j];
    }
    return sums;
}

void predict_all(const ModelBank& bank, const VehicleFixedParams& fixed, const VehicleState& x_prev,
                 const ControlInput& u_prev, double dt, std::span<VehicleState> out,
                 ThreadPool* pool) {
    if (!(dt > 0.0)) throw std::invalid_argument("predict_all: dt must be positive");
    if (out.size() != bank.thetas.size())
        throw std::invalid_argument("predict_all: output span size mismatch");

    const auto* thetas = bank.thetas.data();
    auto body = [&, thetas](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            out[j] = step_model(x_prev, u_prev, fixed, thetas[j], dt, dt);
        }
    };
    if (pool != nullptr) {
        pool->parallel_for(bank.thetas.size(), body);
    } else {
        body(0, bank.thetas.size());
    }
}

int select_best(const ErrorWindow& window) {
    if (!window.warm()) throw std::logic_error("select_best: window not warm");
    const auto& sums = window.rolling_sums();
    int best = 0;
    double best_sum = sums[0];
    for (int j = 1; j < window.n_models(); ++j) {
        if (sums[static_cast<std::size_t>(j)] < best_sum) {
            best_sum = sums[static_cast<std::size_t>(j)];
            best = j;
        }
    }
    return best;
}

void dump_bank(const ModelBank& bank, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (f == nullptr) throw std::runtime_error("cannot write bank file: " + path);
    std::fprintf(f, "b_f,b_r,c_f,c_r,d_f,d_r,c_ro,c_d\n");
    for (const auto& t : bank.thetas) {
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", t.b_f, t.b_r, t.c_f,
                     t.c_r, t.d_f, t.d_r, t.c_ro, t.c_d);
    }
    std::fclose(f);
}

}  // namespace lla
