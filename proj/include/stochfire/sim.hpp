#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "stochfire/grid.hpp"
#include "stochfire/rng.hpp"

namespace stochfire {

// Full parameterization of one cellular-automaton run. The stochasticity
// knob is s_level: a heat-saturated tree ignites with per-step probability
// p_ignite = 1 - s_level/100, so s_level 0 is fully deterministic.
struct SimConfig {
    int rows = 64;
    int cols = 64;
    double density = 0.55;      // probability a cell starts as Tree
    double s_level = 20.0;      // percent, in [0, 100]
    double q_threshold = 1.0;   // heat above which a tree can ignite
    double i_seed = 10.0;       // seed heat = i_seed * q_threshold
    double q_die = 0.25;        // heat shed per step by a radiating ember
    double q_dead = 0.05;       // ember extinction cutoff
    double alpha = 0.50;        // fire-to-tree heat transfer fraction
    int radius = 1;             // Moore neighborhood radius
    int max_steps = 200;        // maximum frames per trace, including frame 0
    int n_seeds = 4;
    // Fixed seed coordinates (row, col); empty means random placement on trees.
    std::vector<std::array<int, 2>> seed_cells;
    std::uint64_t master_seed = 0x5eedf19eULL;
    // When true (the ensemble default), forest layout and fire-seed placement
    // are drawn from substreams keyed by the master seed alone, so every
    // simulation index shares frame 0 exactly.
    bool shared_initial = true;

    double p_ignite() const { return 1.0 - s_level / 100.0; }

    // Throws ConfigError on any out-of-range field.
    void validate() const;

    bool operator==(const SimConfig&) const = default;
};

// Time-indexed record of one Monte-Carlo realization. Frames carry states
// only (see GridFrame); terminated_at is set when the fire provably cannot
// evolve further, and empty when the run was cut off at max_steps.
struct SimulationTrace {
    SimConfig config;
    std::uint32_t sim_index = 0;
    std::vector<GridFrame> frames;
    std::optional<int> terminated_at;
};

// Random forest layout: each cell independently Tree with probability
// config.density. Heat all zero, t = 0, not yet seeded.
GridFrame init_grid(const SimConfig& config, SplitMix64& rng);

// Gives n_seeds distinct Tree cells heat i_seed * q_threshold. Random
// placement resamples until a Tree is hit (bounded retries); fixed
// coordinates must name Tree cells. Throws SeedingError otherwise.
void seed_fire(GridFrame& frame, const SimConfig& config, SplitMix64& rng);

// One synchronous update, all reads from the time-t snapshot:
//   1. each Tree gains alpha * (heat of every Fire neighbor) plus q_die per
//      radiating Ember neighbor;
//   2. each Ember with heat >= q_dead sheds q_die per non-Fire neighbor and
//      dies once its heat falls below q_dead;
//   3. each Tree whose new heat exceeds q_threshold runs an independent
//      Bernoulli(p_ignite) trial, drawn in row-major order; failures keep
//      their heat and retry on later steps;
//   4. every Fire becomes Ember, keeping its heat.
GridFrame step(const GridFrame& frame, const SimConfig& config, SplitMix64& rng);

// True when nothing can change anymore: no Fire, no Ember with heat >=
// q_dead, and no Tree holding heat above q_threshold (a pending ignition).
bool is_terminal(const GridFrame& frame, const SimConfig& config);

// Runs init + seeding + stepping until the terminal state or max_steps
// frames. The dynamics substream is derived from (master_seed, sim_index);
// layout/seeding substreams additionally honor shared_initial.
SimulationTrace run_simulation(const SimConfig& config, std::uint32_t sim_index);

// Same, but reuses an already-built initial frame (frame 0 after seeding).
// Lets ensembles build the shared initial condition once.
SimulationTrace run_simulation_from(const GridFrame& initial, const SimConfig& config,
                                    std::uint32_t sim_index);

// The post-seeding frame 0 a given simulation index would start from.
GridFrame build_initial_frame(const SimConfig& config, std::uint32_t sim_index);

// Repeats the final frame (or truncates) so the trace has exactly
// `length` frames.
void pad_trace(SimulationTrace& trace, int length);

}  // namespace stochfire
