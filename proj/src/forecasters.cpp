#include "stochfire/forecasters.hpp"

#include <algorithm>
#include <unordered_set>

#include "stochfire/errors.hpp"

namespace stochfire {

std::vector<double> ForecastMap::frame(int t) const {
    if (t < 0 || t >= horizon) throw InputError("forecast timestep out of range");
    const std::size_t n = cells();
    return {values.begin() + static_cast<std::ptrdiff_t>(t * n),
            values.begin() + static_cast<std::ptrdiff_t>((t + 1) * n)};
}

void check_no_contamination(const ForecastMap& forecast, const MaskEnsemble& eval) {
    if (!forecast.holdout_required) return;
    if (forecast.source_master_seed != eval.master_seed ||
        forecast.source_s_level != eval.s_level) {
        return;  // different process: disjoint by construction
    }
    std::unordered_set<std::uint32_t> train(forecast.source_sims.begin(),
                                            forecast.source_sims.end());
    for (std::uint32_t s : eval.sim_indices) {
        if (train.count(s)) {
            throw ContaminationError("evaluation sim " + std::to_string(s) +
                                     " was used to fit the forecast");
        }
    }
}

ForecastMap oracle_forecast(const MaskEnsemble& training_half) {
    const MicroStatMap stat = micro_stat_map(training_half);
    ForecastMap f;
    f.kind = "oracle";
    f.horizon = stat.horizon;
    f.rows = stat.rows;
    f.cols = stat.cols;
    f.values = stat.values;
    f.holdout_required = true;
    f.source_master_seed = training_half.master_seed;
    f.source_s_level = training_half.s_level;
    f.source_sims = training_half.sim_indices;
    return f;
}

ForecastMap mismatched_oracle(const MaskEnsemble& train_a, const MaskEnsemble& eval_b) {
    if (train_a.master_seed != eval_b.master_seed || train_a.rows != eval_b.rows ||
        train_a.cols != eval_b.cols) {
        throw InputError("oracle and evaluation ensembles must share the initial condition");
    }
    ForecastMap f = oracle_forecast(train_a);
    f.kind = "mismatched_oracle";
    return f;
}

ForecastMap persistence_forecast(const SimulationTrace& observed, int t0) {
    if (observed.frames.empty()) throw InputError("observed trace has no frames");
    if (t0 < 1 || t0 >= static_cast<int>(observed.frames.size())) {
        throw InputError("observation cutoff t0 out of range");
    }
    ForecastMap f;
    f.kind = "persistence";
    f.horizon = static_cast<int>(observed.frames.size());
    f.rows = observed.frames[0].rows;
    f.cols = observed.frames[0].cols;
    f.values.reserve(static_cast<std::size_t>(f.horizon) * f.cells());
    for (int t = 0; t < f.horizon; ++t) {
        const auto mask = burnt_mask(observed.frames[std::min(t, t0)]);
        for (std::uint8_t b : mask) f.values.push_back(b ? 1.0 : 0.0);
    }
    return f;
}

ForecastMap constant_forecast(double c, int horizon, int rows, int cols) {
    if (c < 0.0 || c > 1.0) throw InputError("constant forecast must lie in [0, 1]");
    if (horizon < 1 || rows < 1 || cols < 1) {
        throw InputError("forecast dimensions must be positive");
    }
    ForecastMap f;
    f.kind = "constant";
    f.horizon = horizon;
    f.rows = rows;
    f.cols = cols;
    f.values.assign(static_cast<std::size_t>(horizon) * rows * cols, c);
    return f;
}

}  // namespace stochfire
