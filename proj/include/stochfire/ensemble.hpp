#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "stochfire/sim.hpp"

namespace stochfire {

// One empirical stochastic process: n_sims Monte-Carlo runs of the same
// config, every trace padded to a common horizon.
struct EnsembleSpec {
    SimConfig config;
    int n_sims = 1000;
    // Common trace length after padding; 0 means config.max_steps.
    int pad_to = 0;

    int horizon() const { return pad_to > 0 ? pad_to : config.max_steps; }
    void validate() const;
};

// Burnt masks for a whole ensemble, one bit per cell, packed t-major within
// each simulation. This is all the statistics below need, so full traces
// never have to stay resident.
struct MaskEnsemble {
    int rows = 0;
    int cols = 0;
    int horizon = 0;
    std::uint32_t n_sims = 0;
    // Identity of the generating process; (master_seed, s_level, sim_index)
    // triples let forecaster code prove train/eval disjointness.
    std::uint64_t master_seed = 0;
    double s_level = 0.0;
    std::vector<std::uint32_t> sim_indices;
    std::vector<int> initial_tree_counts;  // per sim, frame-0 Tree count
    std::vector<std::uint64_t> bits;

    std::size_t cells() const { return static_cast<std::size_t>(rows) * cols; }
    std::size_t words_per_frame() const { return (cells() + 63) / 64; }
    std::size_t frame_offset(std::uint32_t sim, int t) const {
        return (static_cast<std::size_t>(sim) * horizon + t) * words_per_frame();
    }
    bool burnt(std::uint32_t sim, int t, std::size_t cell) const {
        const std::uint64_t word = bits[frame_offset(sim, t) + cell / 64];
        return (word >> (cell % 64)) & 1u;
    }
    long long burnt_count(std::uint32_t sim, int t) const;
    // Unpacked 0/1 burnt mask of one frame.
    std::vector<std::uint8_t> mask_at(std::uint32_t sim, int t) const;

    // Appends one trace (must match dims; shorter traces repeat their final
    // frame up to the horizon). Slot -1 appends; otherwise writes the
    // preallocated region for that sim so workers can fill slots in parallel.
    void add_trace(const SimulationTrace& trace, long long slot = -1);
    void preallocate(int rows, int cols, int horizon, std::uint32_t n_sims);

    // Copies the selected sims (given as positions into this ensemble) into a
    // standalone ensemble, identity preserved.
    MaskEnsemble subset(const std::vector<std::uint32_t>& positions) const;
};

// Disjoint train/eval halves by sim position: the first
// floor(train_ratio * n) sims train, the rest evaluate.
struct EnsembleSplit {
    MaskEnsemble train;
    MaskEnsemble eval;
};
EnsembleSplit split_ensemble(const MaskEnsemble& ensemble, double train_ratio = 0.5);

// Burn-frequency estimates: entry (t, r, c) = fraction of simulations in
// which that cell is burnt at time t.
struct MicroStatMap {
    int horizon = 0;
    int rows = 0;
    int cols = 0;
    std::vector<double> values;  // t-major, then row-major

    std::size_t idx(int t, int r, int c) const {
        return (static_cast<std::size_t>(t) * rows + r) * cols + c;
    }
    double at(int t, int r, int c) const { return values[idx(t, r, c)]; }
};

// Per-timestep moments of the macrostate across the ensemble, with the raw
// integer samples kept for histograms. Variances are population (1/N).
struct MacroSeries {
    std::vector<std::vector<int>> burnt_samples;    // [t][sim]
    std::vector<int> initial_tree_counts;           // [sim]
    std::vector<double> mean_burnt;
    std::vector<double> var_burnt;
    std::vector<double> mean_unburnt;
    std::vector<double> var_unburnt;

    int horizon() const { return static_cast<int>(mean_burnt.size()); }
    int n_sims() const { return static_cast<int>(initial_tree_counts.size()); }
    int unburnt_sample(int t, int sim) const {
        return initial_tree_counts[sim] - burnt_samples[t][sim];
    }
};

struct Histogram {
    std::vector<double> bin_lo;
    std::vector<double> bin_hi;
    std::vector<long long> counts;
};

// Runs every simulation in the spec and hands each finished, padded trace to
// the callback in sim_index order.
void for_each_trace(const EnsembleSpec& spec,
                    const std::function<void(SimulationTrace&&)>& fn);

// Convenience form that keeps all traces; only sensible for small ensembles.
std::vector<SimulationTrace> run_ensemble(const EnsembleSpec& spec);

// Streams simulations straight into packed burnt masks. workers > 1 splits
// sim indices round-robin across threads; every sim writes its own slot, so
// the result is identical for any worker count.
MaskEnsemble run_mask_ensemble(const EnsembleSpec& spec, int workers = 1);

// Builds the mask structure from already-materialized traces (e.g. loaded
// back from disk); statistics from either path agree exactly.
MaskEnsemble pack_traces(const std::vector<SimulationTrace>& traces, int horizon = 0);

MicroStatMap micro_stat_map(const MaskEnsemble& ensemble);
MacroSeries macro_series(const MaskEnsemble& ensemble);

// First t whose trailing five consecutive mean_burnt deltas all fall below
// 0.1% of the grid size; T-1 when the series never settles.
int steady_state_timestep(const MacroSeries& series, std::size_t grid_cells,
                          double rel_tol = 0.001, int window = 5);

// Equal-width bins over the per-sim unburnt-tree counts at timestep t.
Histogram steady_state_histogram(const MacroSeries& series, int t, int n_bins = 30);

struct SweepLevelResult {
    double s_level = 0.0;
    MacroSeries series;
    MicroStatMap micro;
    int steady_t = 0;
    double steady_sd_burnt = 0.0;
};

// One ESP per S-Level, all from the same master seed so the initial forest
// and fire seed are identical across levels.
std::vector<SweepLevelResult> slevel_sweep(const EnsembleSpec& base,
                                           const std::vector<double>& s_levels,
                                           bool keep_micro = true, int workers = 1);

}  // namespace stochfire
