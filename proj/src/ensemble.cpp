#include "stochfire/ensemble.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <thread>

#include "stochfire/errors.hpp"

namespace stochfire {

void EnsembleSpec::validate() const {
    config.validate();
    if (n_sims < 1) throw ConfigError("n_sims must be at least 1");
    if (pad_to < 0) throw ConfigError("pad_to must be non-negative");
}

long long MaskEnsemble::burnt_count(std::uint32_t sim, int t) const {
    const std::size_t off = frame_offset(sim, t);
    long long n = 0;
    for (std::size_t w = 0; w < words_per_frame(); ++w) {
        n += std::popcount(bits[off + w]);
    }
    return n;
}

std::vector<std::uint8_t> MaskEnsemble::mask_at(std::uint32_t sim, int t) const {
    if (sim >= n_sims || t < 0 || t >= horizon) {
        throw InputError("mask_at: sim or timestep out of range");
    }
    std::vector<std::uint8_t> mask(cells(), 0);
    const std::uint64_t* frame = bits.data() + frame_offset(sim, t);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        mask[i] = (frame[i / 64] >> (i % 64)) & 1u;
    }
    return mask;
}

void MaskEnsemble::preallocate(int rows_, int cols_, int horizon_, std::uint32_t n_sims_) {
    rows = rows_;
    cols = cols_;
    horizon = horizon_;
    n_sims = n_sims_;
    sim_indices.assign(n_sims_, 0);
    initial_tree_counts.assign(n_sims_, 0);
    bits.assign(static_cast<std::size_t>(n_sims_) * horizon_ * words_per_frame(), 0);
}

void MaskEnsemble::add_trace(const SimulationTrace& trace, long long slot) {
    if (trace.frames.empty()) throw InputError("trace has no frames");
    if (slot < 0) {
        if (rows == 0) {
            rows = trace.frames[0].rows;
            cols = trace.frames[0].cols;
            if (horizon == 0) horizon = static_cast<int>(trace.frames.size());
            master_seed = trace.config.master_seed;
            s_level = trace.config.s_level;
        } else if (trace.config.master_seed != master_seed ||
                   trace.config.s_level != s_level) {
            throw InputError("trace config differs from the ensemble's");
        }
        slot = n_sims;
        ++n_sims;
        sim_indices.resize(n_sims, 0);
        initial_tree_counts.resize(n_sims, 0);
        bits.resize(static_cast<std::size_t>(n_sims) * horizon * words_per_frame(), 0);
    }
    if (trace.frames[0].rows != rows || trace.frames[0].cols != cols) {
        throw InputError("trace grid shape differs from the ensemble's");
    }
    if (static_cast<int>(trace.frames.size()) > horizon) {
        throw InputError("trace is longer than the ensemble horizon");
    }
    sim_indices[slot] = trace.sim_index;
    initial_tree_counts[slot] =
        static_cast<int>(count_state(trace.frames[0], CellState::Tree));

    const std::size_t wpf = words_per_frame();
    const std::size_t n_cells = cells();
    for (int t = 0; t < horizon; ++t) {
        const std::size_t src_t =
            std::min<std::size_t>(t, trace.frames.size() - 1);  // repeat final frame
        const GridFrame& f = trace.frames[src_t];
        std::uint64_t* dst = bits.data() + frame_offset(static_cast<std::uint32_t>(slot), t);
        if (src_t < static_cast<std::size_t>(t)) {
            const std::uint64_t* prev =
                bits.data() + frame_offset(static_cast<std::uint32_t>(slot), t - 1);
            std::copy(prev, prev + wpf, dst);
            continue;
        }
        for (std::size_t i = 0; i < n_cells; ++i) {
            if (is_burnt(f.states[i])) dst[i / 64] |= std::uint64_t{1} << (i % 64);
        }
    }
}

MaskEnsemble MaskEnsemble::subset(const std::vector<std::uint32_t>& positions) const {
    MaskEnsemble out;
    out.preallocate(rows, cols, horizon, static_cast<std::uint32_t>(positions.size()));
    out.master_seed = master_seed;
    out.s_level = s_level;
    const std::size_t frame_words = static_cast<std::size_t>(horizon) * words_per_frame();
    for (std::size_t k = 0; k < positions.size(); ++k) {
        const std::uint32_t p = positions[k];
        if (p >= n_sims) throw InputError("subset position out of range");
        out.sim_indices[k] = sim_indices[p];
        out.initial_tree_counts[k] = initial_tree_counts[p];
        std::copy(bits.begin() + frame_offset(p, 0),
                  bits.begin() + frame_offset(p, 0) + frame_words,
                  out.bits.begin() + out.frame_offset(static_cast<std::uint32_t>(k), 0));
    }
    return out;
}

EnsembleSplit split_ensemble(const MaskEnsemble& ensemble, double train_ratio) {
    if (train_ratio <= 0.0 || train_ratio >= 1.0) {
        throw InputError("train_ratio must lie strictly inside (0, 1)");
    }
    const auto n_train =
        static_cast<std::uint32_t>(train_ratio * ensemble.n_sims);
    if (n_train == 0 || n_train == ensemble.n_sims) {
        throw InputError("split leaves an empty half");
    }
    std::vector<std::uint32_t> train_pos, eval_pos;
    for (std::uint32_t i = 0; i < ensemble.n_sims; ++i) {
        (i < n_train ? train_pos : eval_pos).push_back(i);
    }
    return {ensemble.subset(train_pos), ensemble.subset(eval_pos)};
}

void for_each_trace(const EnsembleSpec& spec,
                    const std::function<void(SimulationTrace&&)>& fn) {
    spec.validate();
    const GridFrame shared = spec.config.shared_initial
                                 ? build_initial_frame(spec.config, 0)
                                 : GridFrame{};
    for (int s = 0; s < spec.n_sims; ++s) {
        const auto idx = static_cast<std::uint32_t>(s);
        SimulationTrace trace =
            spec.config.shared_initial
                ? run_simulation_from(shared, spec.config, idx)
                : run_simulation(spec.config, idx);
        pad_trace(trace, spec.horizon());
        fn(std::move(trace));
    }
}

std::vector<SimulationTrace> run_ensemble(const EnsembleSpec& spec) {
    std::vector<SimulationTrace> traces;
    traces.reserve(spec.n_sims);
    for_each_trace(spec, [&](SimulationTrace&& t) { traces.push_back(std::move(t)); });
    return traces;
}

MaskEnsemble run_mask_ensemble(const EnsembleSpec& spec, int workers) {
    spec.validate();
    if (workers < 1) throw ConfigError("workers must be at least 1");
    MaskEnsemble out;
    out.preallocate(spec.config.rows, spec.config.cols, spec.horizon(),
                    static_cast<std::uint32_t>(spec.n_sims));
    out.master_seed = spec.config.master_seed;
    out.s_level = spec.config.s_level;

    const GridFrame shared = spec.config.shared_initial
                                 ? build_initial_frame(spec.config, 0)
                                 : GridFrame{};
    auto run_slot = [&](std::uint32_t idx) {
        SimulationTrace trace = spec.config.shared_initial
                                    ? run_simulation_from(shared, spec.config, idx)
                                    : run_simulation(spec.config, idx);
        pad_trace(trace, spec.horizon());
        out.add_trace(trace, idx);
    };

    const int n_workers = std::min(workers, spec.n_sims);
    if (n_workers <= 1) {
        for (int s = 0; s < spec.n_sims; ++s) run_slot(static_cast<std::uint32_t>(s));
        return out;
    }
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) {
        pool.emplace_back([&, w] {
            for (int s = w; s < spec.n_sims; s += n_workers) {
                run_slot(static_cast<std::uint32_t>(s));
            }
        });
    }
    for (auto& th : pool) th.join();
    return out;
}

MaskEnsemble pack_traces(const std::vector<SimulationTrace>& traces, int horizon) {
    if (traces.empty()) throw InputError("cannot pack an empty trace collection");
    MaskEnsemble out;
    out.horizon = horizon;
    if (out.horizon == 0) {
        for (const auto& t : traces) {
            out.horizon = std::max(out.horizon, static_cast<int>(t.frames.size()));
        }
    }
    for (const auto& t : traces) out.add_trace(t);
    return out;
}

MicroStatMap micro_stat_map(const MaskEnsemble& ensemble) {
    if (ensemble.n_sims == 0) throw InputError("ensemble is empty");
    MicroStatMap map;
    map.horizon = ensemble.horizon;
    map.rows = ensemble.rows;
    map.cols = ensemble.cols;
    const std::size_t n_cells = ensemble.cells();
    std::vector<std::uint32_t> counts(static_cast<std::size_t>(ensemble.horizon) * n_cells, 0);

    const std::size_t wpf = ensemble.words_per_frame();
    for (std::uint32_t sim = 0; sim < ensemble.n_sims; ++sim) {
        for (int t = 0; t < ensemble.horizon; ++t) {
            const std::uint64_t* frame = ensemble.bits.data() + ensemble.frame_offset(sim, t);
            std::uint32_t* plane = counts.data() + static_cast<std::size_t>(t) * n_cells;
            for (std::size_t w = 0; w < wpf; ++w) {
                std::uint64_t word = frame[w];
                while (word) {
                    const int b = std::countr_zero(word);
                    word &= word - 1;
                    ++plane[w * 64 + b];
                }
            }
        }
    }
    map.values.resize(counts.size());
    const double inv = 1.0 / ensemble.n_sims;
    for (std::size_t i = 0; i < counts.size(); ++i) map.values[i] = counts[i] * inv;
    return map;
}

namespace {

void mean_var(const std::vector<int>& xs, double& mean, double& var) {
    long long sum = 0;
    for (int x : xs) sum += x;
    mean = static_cast<double>(sum) / xs.size();
    double ss = 0.0;
    for (int x : xs) {
        const double d = x - mean;
        ss += d * d;
    }
    var = ss / xs.size();  // population variance
}

}  // namespace

MacroSeries macro_series(const MaskEnsemble& ensemble) {
    if (ensemble.n_sims == 0) throw InputError("macro series needs at least 1 simulation");
    MacroSeries series;
    series.initial_tree_counts = ensemble.initial_tree_counts;
    series.burnt_samples.assign(ensemble.horizon, std::vector<int>(ensemble.n_sims, 0));
    for (std::uint32_t sim = 0; sim < ensemble.n_sims; ++sim) {
        for (int t = 0; t < ensemble.horizon; ++t) {
            series.burnt_samples[t][sim] = static_cast<int>(ensemble.burnt_count(sim, t));
        }
    }
    series.mean_burnt.resize(ensemble.horizon);
    series.var_burnt.resize(ensemble.horizon);
    series.mean_unburnt.resize(ensemble.horizon);
    series.var_unburnt.resize(ensemble.horizon);
    std::vector<int> unburnt(ensemble.n_sims);
    for (int t = 0; t < ensemble.horizon; ++t) {
        mean_var(series.burnt_samples[t], series.mean_burnt[t], series.var_burnt[t]);
        for (std::uint32_t s = 0; s < ensemble.n_sims; ++s) {
            unburnt[s] = series.unburnt_sample(t, s);
        }
        mean_var(unburnt, series.mean_unburnt[t], series.var_unburnt[t]);
    }
    return series;
}

int steady_state_timestep(const MacroSeries& series, std::size_t grid_cells,
                          double rel_tol, int window) {
    const int T = series.horizon();
    if (T == 0) throw InputError("empty macro series");
    const double tol = rel_tol * static_cast<double>(grid_cells);
    int quiet = 0;
    for (int t = 1; t < T; ++t) {
        const double delta = std::abs(series.mean_burnt[t] - series.mean_burnt[t - 1]);
        quiet = delta < tol ? quiet + 1 : 0;
        if (quiet >= window) return t;
    }
    return T - 1;
}

Histogram steady_state_histogram(const MacroSeries& series, int t, int n_bins) {
    if (t < 0 || t >= series.horizon()) {
        throw InputError("histogram timestep " + std::to_string(t) + " out of range");
    }
    if (n_bins < 1) throw InputError("histogram needs at least 1 bin");
    const int n = series.n_sims();
    std::vector<int> samples(n);
    for (int s = 0; s < n; ++s) samples[s] = series.unburnt_sample(t, s);
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    const double lo = *lo_it;
    const double hi = *hi_it;

    Histogram h;
    h.bin_lo.resize(n_bins);
    h.bin_hi.resize(n_bins);
    h.counts.assign(n_bins, 0);
    const double width = (hi - lo) / n_bins;
    for (int b = 0; b < n_bins; ++b) {
        h.bin_lo[b] = lo + b * width;
        h.bin_hi[b] = b + 1 == n_bins ? hi : lo + (b + 1) * width;
    }
    for (int x : samples) {
        int b = width > 0.0 ? static_cast<int>((x - lo) / width) : 0;
        b = std::clamp(b, 0, n_bins - 1);
        ++h.counts[b];
    }
    return h;
}

std::vector<SweepLevelResult> slevel_sweep(const EnsembleSpec& base,
                                           const std::vector<double>& s_levels,
                                           bool keep_micro, int workers) {
    if (s_levels.empty()) throw InputError("sweep needs at least one S-Level");
    std::vector<SweepLevelResult> out;
    out.reserve(s_levels.size());
    for (double level : s_levels) {
        EnsembleSpec spec = base;
        spec.config.s_level = level;
        const MaskEnsemble masks = run_mask_ensemble(spec, workers);
        SweepLevelResult r;
        r.s_level = level;
        r.series = macro_series(masks);
        if (keep_micro) r.micro = micro_stat_map(masks);
        r.steady_t = steady_state_timestep(r.series, masks.cells());
        r.steady_sd_burnt = std::sqrt(r.series.var_burnt[r.steady_t]);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace stochfire
