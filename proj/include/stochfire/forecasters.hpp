#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stochfire/ensemble.hpp"
#include "stochfire/sim.hpp"

namespace stochfire {

// A probability grid per timestep: entry (t, r, c) forecasts the chance that
// cell (r, c) is burnt at time t. Oracle-built maps carry the identity of
// the simulations they were fitted on so evaluation can refuse to score the
// training data.
struct ForecastMap {
    std::string kind;  // oracle | mismatched_oracle | persistence | constant
    int horizon = 0;
    int rows = 0;
    int cols = 0;
    std::vector<double> values;  // t-major, then row-major

    // Fit provenance; meaningful only when holdout_required.
    bool holdout_required = false;
    std::uint64_t source_master_seed = 0;
    double source_s_level = 0.0;
    std::vector<std::uint32_t> source_sims;

    std::size_t idx(int t, int r, int c) const {
        return (static_cast<std::size_t>(t) * rows + r) * cols + c;
    }
    double at(int t, int r, int c) const { return values[idx(t, r, c)]; }
    // The flattened frame [t * cells, (t+1) * cells).
    std::vector<double> frame(int t) const;
    std::size_t cells() const { return static_cast<std::size_t>(rows) * cols; }
};

// Throws ContaminationError when a holdout-required forecast shares any
// (master_seed, s_level, sim_index) triple with the evaluation ensemble.
void check_no_contamination(const ForecastMap& forecast, const MaskEnsemble& eval);

// The calibrated oracle: burn-frequency map of the training half.
ForecastMap oracle_forecast(const MaskEnsemble& training_half);

// Oracle fitted at one S-Level for scoring at another; both ensembles must
// share the initial condition (same master seed, same grid).
ForecastMap mismatched_oracle(const MaskEnsemble& train_a, const MaskEnsemble& eval_b);

// Freezes the observed realization's burnt mask at t0 for all later t;
// earlier timesteps carry the observed masks themselves.
ForecastMap persistence_forecast(const SimulationTrace& observed, int t0);

ForecastMap constant_forecast(double c, int horizon, int rows, int cols);

}  // namespace stochfire
