#include "stochfire/grid.hpp"

namespace stochfire {

std::vector<std::uint8_t> burnt_mask(const GridFrame& frame) {
    std::vector<std::uint8_t> mask(frame.states.size(), 0);
    for (std::size_t i = 0; i < frame.states.size(); ++i) {
        mask[i] = is_burnt(frame.states[i]) ? 1 : 0;
    }
    return mask;
}

long long count_state(const GridFrame& frame, CellState s) {
    long long n = 0;
    for (CellState c : frame.states) {
        if (c == s) ++n;
    }
    return n;
}

}  // namespace stochfire
