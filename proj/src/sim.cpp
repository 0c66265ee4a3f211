#include "stochfire/sim.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "stochfire/errors.hpp"

namespace stochfire {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

}  // namespace

void SimConfig::validate() const {
    require(rows >= 1 && cols >= 1, "grid must be at least 1x1");
    require(density >= 0.0 && density <= 1.0, "density must lie in [0, 1]");
    require(s_level >= 0.0 && s_level <= 100.0, "s_level must lie in [0, 100]");
    require(q_threshold > 0.0, "q_threshold must be positive");
    require(i_seed > 0.0, "i_seed must be positive");
    require(q_die > 0.0, "q_die must be positive");
    require(q_dead > 0.0, "q_dead must be positive");
    require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
    require(radius >= 1, "radius must be at least 1");
    require(max_steps >= 1, "max_steps must be at least 1");
    require(n_seeds >= 0, "n_seeds must be non-negative");
    if (!seed_cells.empty()) {
        require(static_cast<int>(seed_cells.size()) == n_seeds,
                "seed_cells must list exactly n_seeds cells");
        std::unordered_set<long long> seen;
        for (const auto& rc : seed_cells) {
            require(rc[0] >= 0 && rc[0] < rows && rc[1] >= 0 && rc[1] < cols,
                    "seed cell out of bounds");
            require(seen.insert(static_cast<long long>(rc[0]) * cols + rc[1]).second,
                    "seed cells must be distinct");
        }
    }
}

GridFrame init_grid(const SimConfig& config, SplitMix64& rng) {
    GridFrame frame;
    frame.rows = config.rows;
    frame.cols = config.cols;
    frame.t = 0;
    frame.states.assign(frame.cell_count(), CellState::NoTree);
    frame.heat.assign(frame.cell_count(), 0.0);
    for (std::size_t i = 0; i < frame.states.size(); ++i) {
        if (rng.next_double() < config.density) frame.states[i] = CellState::Tree;
    }
    return frame;
}

void seed_fire(GridFrame& frame, const SimConfig& config, SplitMix64& rng) {
    if (config.n_seeds == 0) return;
    const double seed_heat = config.i_seed * config.q_threshold;

    if (!config.seed_cells.empty()) {
        for (const auto& rc : config.seed_cells) {
            const std::size_t i = frame.idx(rc[0], rc[1]);
            if (frame.states[i] != CellState::Tree) {
                throw SeedingError("seed cell (" + std::to_string(rc[0]) + ", " +
                                   std::to_string(rc[1]) + ") is not a tree");
            }
            frame.heat[i] = seed_heat;
        }
        return;
    }

    if (count_state(frame, CellState::Tree) < config.n_seeds) {
        throw SeedingError("forest has fewer trees than n_seeds");
    }
    std::unordered_set<std::uint64_t> chosen;
    const std::uint64_t cells = frame.cell_count();
    const std::uint64_t max_attempts = cells * 64;
    std::uint64_t attempts = 0;
    while (chosen.size() < static_cast<std::size_t>(config.n_seeds)) {
        if (++attempts > max_attempts) {
            throw SeedingError("gave up placing fire seeds after too many retries");
        }
        const std::uint64_t i = rng.next_below(cells);
        if (frame.states[i] != CellState::Tree) continue;
        if (!chosen.insert(i).second) continue;
        frame.heat[i] = seed_heat;
    }
}

GridFrame step(const GridFrame& frame, const SimConfig& config, SplitMix64& rng) {
    if (!frame.has_heat()) throw InternalError("step() needs a frame with heat data");
    GridFrame next;
    next.rows = frame.rows;
    next.cols = frame.cols;
    next.t = frame.t + 1;
    next.states = frame.states;
    next.heat = frame.heat;

    const int R = config.radius;
    const double p_ignite = config.p_ignite();

    for (int r = 0; r < frame.rows; ++r) {
        for (int c = 0; c < frame.cols; ++c) {
            const std::size_t i = frame.idx(r, c);
            const CellState s = frame.states[i];
            if (s == CellState::NoTree || s == CellState::Dead) continue;

            if (s == CellState::Fire) {
                next.states[i] = CellState::Ember;
                continue;
            }

            // Both trees and embers need the neighborhood scan.
            double gain = 0.0;        // heat a tree picks up this step
            int non_fire_nbrs = 0;    // cells an ember radiates into
            for (int dr = -R; dr <= R; ++dr) {
                for (int dc = -R; dc <= R; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    const int nr = r + dr;
                    const int nc = c + dc;
                    if (nr < 0 || nr >= frame.rows || nc < 0 || nc >= frame.cols) continue;
                    const std::size_t j = frame.idx(nr, nc);
                    const CellState ns = frame.states[j];
                    if (ns == CellState::Fire) {
                        gain += config.alpha * frame.heat[j];
                    } else {
                        ++non_fire_nbrs;
                        if (s == CellState::Tree && ns == CellState::Ember &&
                            frame.heat[j] >= config.q_dead) {
                            gain += config.q_die;
                        }
                    }
                }
            }

            if (s == CellState::Ember) {
                const double shed = std::max(0.0, frame.heat[i] - config.q_die * non_fire_nbrs);
                next.heat[i] = shed;
                if (shed < config.q_dead) {
                    next.states[i] = CellState::Dead;
                    next.heat[i] = 0.0;
                }
                continue;
            }

            // Tree: accumulate, then an independent ignition trial. Draws are
            // consumed in row-major cell order so runs replay bit-exactly.
            const double h = frame.heat[i] + gain;
            next.heat[i] = h;
            if (h > config.q_threshold) {
                if (rng.next_double() < p_ignite) {
                    next.states[i] = CellState::Fire;
                }
                // Failed trials keep the heat and retry next step.
            }
        }
    }
    return next;
}

bool is_terminal(const GridFrame& frame, const SimConfig& config) {
    if (!frame.has_heat()) throw InternalError("is_terminal() needs a frame with heat data");
    for (std::size_t i = 0; i < frame.states.size(); ++i) {
        switch (frame.states[i]) {
            case CellState::Fire:
                return false;
            case CellState::Ember:
                if (frame.heat[i] >= config.q_dead) return false;
                break;
            case CellState::Tree:
                if (frame.heat[i] > config.q_threshold) return false;
                break;
            default:
                break;
        }
    }
    return true;
}

GridFrame build_initial_frame(const SimConfig& config, std::uint32_t sim_index) {
    config.validate();
    const std::uint64_t layout_idx = config.shared_initial ? 0 : sim_index;
    SplitMix64 layout_rng(substream_seed(config.master_seed, RngDomain::forest_layout, layout_idx));
    GridFrame frame = init_grid(config, layout_rng);
    SplitMix64 seed_rng(substream_seed(config.master_seed, RngDomain::seed_placement, layout_idx));
    seed_fire(frame, config, seed_rng);
    return frame;
}

SimulationTrace run_simulation_from(const GridFrame& initial, const SimConfig& config,
                                    std::uint32_t sim_index) {
    SimulationTrace trace;
    trace.config = config;
    trace.sim_index = sim_index;
    trace.frames.push_back(initial);
    trace.frames.back().t = 0;

    SplitMix64 dyn_rng(substream_seed(config.master_seed, RngDomain::dynamics, sim_index));
    if (is_terminal(trace.frames.back(), config)) {
        trace.terminated_at = 0;
        return trace;
    }
    while (static_cast<int>(trace.frames.size()) < config.max_steps) {
        trace.frames.push_back(step(trace.frames.back(), config, dyn_rng));
        if (is_terminal(trace.frames.back(), config)) {
            trace.terminated_at = trace.frames.back().t;
            break;
        }
    }
    return trace;
}

SimulationTrace run_simulation(const SimConfig& config, std::uint32_t sim_index) {
    return run_simulation_from(build_initial_frame(config, sim_index), config, sim_index);
}

void pad_trace(SimulationTrace& trace, int length) {
    if (length < 1) throw InternalError("pad_trace() needs a positive length");
    while (static_cast<int>(trace.frames.size()) < length) {
        GridFrame copy = trace.frames.back();
        copy.t = static_cast<int>(trace.frames.size());
        trace.frames.push_back(std::move(copy));
    }
    if (static_cast<int>(trace.frames.size()) > length) {
        trace.frames.resize(length);
        if (trace.terminated_at && *trace.terminated_at >= length) {
            trace.terminated_at.reset();
        }
    }
}

}  // namespace stochfire
