#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace stochfire {

// Per-cell automaton state. Legal transitions: Tree->Fire->Ember->Dead;
// NoTree and Dead are absorbing. Numeric values are the on-disk encoding.
enum class CellState : std::uint8_t {
    NoTree = 0,
    Tree = 1,
    Fire = 2,
    Ember = 3,
    Dead = 4,
};

inline bool is_burnt(CellState s) {
    return s == CellState::Fire || s == CellState::Ember || s == CellState::Dead;
}

// One timestep of one simulation: states plus per-cell heat, row-major.
// Heat is the live dynamical quantity; recorded trace frames drop it
// (the trace file format persists states only).
struct GridFrame {
    int rows = 0;
    int cols = 0;
    int t = 0;
    std::vector<CellState> states;
    std::vector<double> heat;

    std::size_t cell_count() const { return static_cast<std::size_t>(rows) * cols; }
    std::size_t idx(int r, int c) const { return static_cast<std::size_t>(r) * cols + c; }

    CellState state(int r, int c) const { return states[idx(r, c)]; }
    double heat_at(int r, int c) const { return heat[idx(r, c)]; }

    bool has_heat() const { return heat.size() == states.size(); }
};

// 1 where the cell has ever ignited (Fire, Ember or Dead), else 0.
std::vector<std::uint8_t> burnt_mask(const GridFrame& frame);

long long count_state(const GridFrame& frame, CellState s);

}  // namespace stochfire
