#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "stochfire/errors.hpp"
#include "stochfire/grid.hpp"
#include "stochfire/sim.hpp"

using namespace stochfire;

namespace {

// All-tree grid with one fixed seed in the middle; deterministic by default.
SimConfig dense_config(int rows, int cols) {
    SimConfig cfg;
    cfg.rows = rows;
    cfg.cols = cols;
    cfg.density = 1.0;
    cfg.s_level = 0.0;
    cfg.alpha = 1.0;
    cfg.i_seed = 2.0;
    cfg.q_die = 0.1;
    cfg.n_seeds = 1;
    cfg.seed_cells = {{rows / 2, cols / 2}};
    return cfg;
}

int chebyshev(int r, int c, int r0, int c0) {
    return std::max(std::abs(r - r0), std::abs(c - c0));
}

bool legal_transition(CellState from, CellState to) {
    switch (from) {
        case CellState::NoTree: return to == CellState::NoTree;
        case CellState::Tree: return to == CellState::Tree || to == CellState::Fire;
        case CellState::Fire: return to == CellState::Ember;
        case CellState::Ember: return to == CellState::Ember || to == CellState::Dead;
        case CellState::Dead: return to == CellState::Dead;
    }
    return false;
}

}  // namespace

TEST_CASE("config validation rejects out-of-range fields") {
    SimConfig cfg;
    CHECK_NOTHROW(cfg.validate());

    SimConfig bad = cfg;
    bad.density = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.s_level = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.alpha = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.alpha = 1.25;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.max_steps = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.n_seeds = 2;
    bad.seed_cells = {{0, 0}};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.n_seeds = 2;
    bad.seed_cells = {{0, 0}, {0, 0}};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("p_ignite is 1 - s_level/100") {
    SimConfig cfg;
    cfg.s_level = 0.0;
    CHECK(cfg.p_ignite() == doctest::Approx(1.0));
    cfg.s_level = 20.0;
    CHECK(cfg.p_ignite() == doctest::Approx(0.8));
    cfg.s_level = 100.0;
    CHECK(cfg.p_ignite() == doctest::Approx(0.0));
}

TEST_CASE("3x3 deterministic spread: seed ignites, then the whole ring") {
    const SimConfig cfg = dense_config(3, 3);
    const SimulationTrace trace = run_simulation(cfg, 0);

    // Frame 0: everything Tree, center holding seed heat i_seed * q_threshold.
    const GridFrame& f0 = trace.frames[0];
    CHECK(count_state(f0, CellState::Tree) == 9);
    CHECK(f0.heat_at(1, 1) == doctest::Approx(2.0));
    CHECK(f0.heat_at(0, 0) == doctest::Approx(0.0));

    // Frame 1: only the seeded tree is above threshold, so only it ignites.
    const GridFrame& f1 = trace.frames[1];
    CHECK(f1.state(1, 1) == CellState::Fire);
    CHECK(count_state(f1, CellState::Fire) == 1);
    CHECK(count_state(f1, CellState::Tree) == 8);
    CHECK(f1.heat_at(1, 1) == doctest::Approx(2.0));

    // Frame 2: every neighbor gained alpha * 2.0 = 2.0 > q_threshold and
    // ignited; the center became Ember keeping its heat.
    const GridFrame& f2 = trace.frames[2];
    CHECK(f2.state(1, 1) == CellState::Ember);
    CHECK(f2.heat_at(1, 1) == doctest::Approx(2.0));
    CHECK(count_state(f2, CellState::Fire) == 8);
    CHECK(f2.heat_at(0, 0) == doctest::Approx(2.0));

    // Frame 3: ring Fire -> Ember; the center ember had zero non-Fire
    // neighbors at t=2 so it shed nothing.
    const GridFrame& f3 = trace.frames[3];
    CHECK(count_state(f3, CellState::Ember) == 9);
    CHECK(f3.heat_at(1, 1) == doctest::Approx(2.0));

    // Eventually everything is Dead and the run terminates.
    REQUIRE(trace.terminated_at.has_value());
    const GridFrame& last = trace.frames.back();
    CHECK(count_state(last, CellState::Dead) == 9);
    CHECK(is_terminal(last, cfg));
}

TEST_CASE("isolated seed burns alone and decays to Dead by ember shedding") {
    SimConfig cfg = dense_config(3, 3);
    cfg.density = 0.0;  // no other trees
    const GridFrame empty = [&] {
        GridFrame f;
        f.rows = f.cols = 3;
        f.states.assign(9, CellState::NoTree);
        f.heat.assign(9, 0.0);
        f.states[f.idx(1, 1)] = CellState::Tree;
        f.heat[f.idx(1, 1)] = cfg.i_seed * cfg.q_threshold;
        return f;
    }();
    const SimulationTrace trace = run_simulation_from(empty, cfg, 0);

    // Heat 2.0, shedding q_die = 0.1 into all 8 non-Fire neighbors per step:
    // Fire(2.0) -> Ember 2.0 -> 1.2 -> 0.4 -> 0 => Dead at t = 5.
    REQUIRE(trace.terminated_at == 5);
    CHECK(trace.frames[1].state(1, 1) == CellState::Fire);
    CHECK(trace.frames[2].state(1, 1) == CellState::Ember);
    CHECK(trace.frames[2].heat_at(1, 1) == doctest::Approx(2.0));
    CHECK(trace.frames[3].heat_at(1, 1) == doctest::Approx(1.2));
    CHECK(trace.frames[4].heat_at(1, 1) == doctest::Approx(0.4));
    CHECK(trace.frames[5].state(1, 1) == CellState::Dead);
    CHECK(trace.frames[5].heat_at(1, 1) == doctest::Approx(0.0));

    // Nothing else ever burns.
    for (const auto& frame : trace.frames) {
        CHECK(count_state(frame, CellState::NoTree) == 8);
    }
}

TEST_CASE("deterministic front advances one Chebyshev ring per step") {
    const SimConfig cfg = dense_config(11, 11);
    const SimulationTrace trace = run_simulation(cfg, 0);

    for (int t = 1; t <= 6; ++t) {
        const GridFrame& f = trace.frames[t];
        for (int r = 0; r < 11; ++r) {
            for (int c = 0; c < 11; ++c) {
                const int d = chebyshev(r, c, 5, 5);
                if (d == t - 1) {
                    CHECK(f.state(r, c) == CellState::Fire);
                } else if (d < t - 1) {
                    CHECK(is_burnt(f.state(r, c)));
                    CHECK(f.state(r, c) != CellState::Fire);
                } else {
                    CHECK(f.state(r, c) == CellState::Tree);
                }
            }
        }
    }
}

TEST_CASE("trees are conserved: no-tree + tree + burnt = cells, burnt monotone") {
    SimConfig cfg;
    cfg.rows = cfg.cols = 24;
    cfg.density = 0.7;
    cfg.s_level = 20.0;
    cfg.master_seed = 17;
    const SimulationTrace trace = run_simulation(cfg, 3);

    const long long cells = 24 * 24;
    const long long initial_trees = count_state(trace.frames[0], CellState::Tree);
    long long prev_burnt = 0;
    for (const auto& frame : trace.frames) {
        const long long trees = count_state(frame, CellState::Tree);
        long long burnt = 0;
        for (const auto b : burnt_mask(frame)) burnt += b;
        CHECK(count_state(frame, CellState::NoTree) + trees + burnt == cells);
        CHECK(trees + burnt == initial_trees);  // trees only ever burn
        CHECK(burnt >= prev_burnt);
        prev_burnt = burnt;
    }
}

TEST_CASE("only legal state transitions ever occur") {
    SimConfig cfg;
    cfg.rows = cfg.cols = 16;
    cfg.s_level = 35.0;
    cfg.master_seed = 901;
    const SimulationTrace trace = run_simulation(cfg, 1);
    REQUIRE(trace.frames.size() >= 2);
    for (std::size_t t = 1; t < trace.frames.size(); ++t) {
        for (std::size_t i = 0; i < trace.frames[t].states.size(); ++i) {
            CHECK(legal_transition(trace.frames[t - 1].states[i], trace.frames[t].states[i]));
        }
    }
}

TEST_CASE("same seed and index replay the exact run") {
    SimConfig cfg;
    cfg.rows = cfg.cols = 20;
    cfg.s_level = 40.0;
    const SimulationTrace a = run_simulation(cfg, 5);
    const SimulationTrace b = run_simulation(cfg, 5);
    REQUIRE(a.frames.size() == b.frames.size());
    CHECK(a.terminated_at == b.terminated_at);
    for (std::size_t t = 0; t < a.frames.size(); ++t) {
        CHECK(a.frames[t].states == b.frames[t].states);
        CHECK(a.frames[t].heat == b.frames[t].heat);
    }
}

TEST_CASE("shared_initial gives every sim index the same frame 0") {
    SimConfig cfg;
    cfg.rows = cfg.cols = 20;
    const GridFrame f0 = build_initial_frame(cfg, 0);
    const GridFrame f7 = build_initial_frame(cfg, 7);
    CHECK(f0.states == f7.states);
    CHECK(f0.heat == f7.heat);

    cfg.shared_initial = false;
    const GridFrame g0 = build_initial_frame(cfg, 0);
    const GridFrame g7 = build_initial_frame(cfg, 7);
    CHECK(g0.states == f0.states);  // index 0 coincides with the shared layout
    CHECK(g0.states != g7.states);
}

TEST_CASE("s_level 0 collapses all simulation indices onto one trajectory") {
    SimConfig cfg;
    cfg.rows = cfg.cols = 20;
    cfg.s_level = 0.0;
    const SimulationTrace a = run_simulation(cfg, 0);
    const SimulationTrace b = run_simulation(cfg, 11);
    REQUIRE(a.frames.size() == b.frames.size());
    for (std::size_t t = 0; t < a.frames.size(); ++t) {
        CHECK(a.frames[t].states == b.frames[t].states);
    }
}

TEST_CASE("s_level 100 never ignites anything") {
    SimConfig cfg;
    cfg.rows = cfg.cols = 8;
    cfg.density = 1.0;
    cfg.s_level = 100.0;
    cfg.n_seeds = 1;
    cfg.seed_cells = {{4, 4}};
    cfg.max_steps = 50;
    const SimulationTrace trace = run_simulation(cfg, 0);
    // The seeded tree keeps its heat forever: never terminal, never burnt.
    CHECK_FALSE(trace.terminated_at.has_value());
    CHECK(static_cast<int>(trace.frames.size()) == 50);
    for (const auto& frame : trace.frames) {
        CHECK(count_state(frame, CellState::Fire) == 0);
    }
}

TEST_CASE("n_seeds 0 terminates immediately") {
    SimConfig cfg;
    cfg.n_seeds = 0;
    const SimulationTrace trace = run_simulation(cfg, 0);
    CHECK(trace.terminated_at == 0);
    CHECK(trace.frames.size() == 1);
}

TEST_CASE("fixed seed cell on a non-tree throws SeedingError") {
    SimConfig cfg;
    cfg.rows = cfg.cols = 4;
    cfg.density = 0.0;
    cfg.n_seeds = 1;
    cfg.seed_cells = {{2, 2}};
    CHECK_THROWS_AS(run_simulation(cfg, 0), SeedingError);
}

TEST_CASE("too few trees for random seeding throws SeedingError") {
    SimConfig cfg;
    cfg.rows = cfg.cols = 4;
    cfg.density = 0.0;
    cfg.n_seeds = 1;
    CHECK_THROWS_AS(run_simulation(cfg, 0), SeedingError);
}

TEST_CASE("ignition is strict: heat exactly at q_threshold does not burn") {
    SimConfig cfg = dense_config(3, 3);
    cfg.i_seed = 1.0;  // seed heat = q_threshold exactly
    const SimulationTrace trace = run_simulation(cfg, 0);
    CHECK(trace.terminated_at == 0);  // nothing above threshold => terminal
    CHECK(count_state(trace.frames[0], CellState::Tree) == 9);
}

TEST_CASE("pad_trace repeats the final frame with advancing t") {
    SimConfig cfg = dense_config(3, 3);
    SimulationTrace trace = run_simulation(cfg, 0);
    const std::size_t original = trace.frames.size();
    pad_trace(trace, 20);
    REQUIRE(trace.frames.size() == 20);
    for (std::size_t t = original; t < 20; ++t) {
        CHECK(trace.frames[t].states == trace.frames[original - 1].states);
        CHECK(trace.frames[t].t == static_cast<int>(t));
    }
}

TEST_CASE("radius 2 reaches trees two cells away in one step") {
    SimConfig cfg = dense_config(7, 7);
    cfg.radius = 2;
    const SimulationTrace trace = run_simulation(cfg, 0);
    // Frame 2: all 24 cells within Chebyshev distance 2 of the center catch.
    CHECK(count_state(trace.frames[2], CellState::Fire) == 24);
}
