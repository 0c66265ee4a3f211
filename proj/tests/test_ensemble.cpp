#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "stochfire/ensemble.hpp"
#include "stochfire/errors.hpp"
#include "stochfire/grid.hpp"

using namespace stochfire;

namespace {

EnsembleSpec small_spec(double s_level = 20.0, int n_sims = 8) {
    EnsembleSpec spec;
    spec.config.rows = 12;
    spec.config.cols = 12;
    spec.config.s_level = s_level;
    spec.config.max_steps = 40;
    spec.config.master_seed = 321;
    spec.n_sims = n_sims;
    return spec;
}

}  // namespace

TEST_CASE("mask ensemble matches traces packed by hand") {
    const EnsembleSpec spec = small_spec();
    const MaskEnsemble fast = run_mask_ensemble(spec);
    const std::vector<SimulationTrace> traces = run_ensemble(spec);
    REQUIRE(fast.n_sims == 8);
    REQUIRE(traces.size() == 8);

    for (std::uint32_t s = 0; s < 8; ++s) {
        CHECK(fast.sim_indices[s] == traces[s].sim_index);
        CHECK(fast.initial_tree_counts[s] ==
              count_state(traces[s].frames[0], CellState::Tree));
        for (int t = 0; t < fast.horizon; ++t) {
            const auto expected = burnt_mask(traces[s].frames[t]);
            CHECK(fast.mask_at(s, t) == expected);
        }
    }

    const MaskEnsemble packed = pack_traces(traces, spec.horizon());
    CHECK(packed.bits == fast.bits);
    CHECK(packed.master_seed == fast.master_seed);
    CHECK(packed.s_level == fast.s_level);
    CHECK(packed.initial_tree_counts == fast.initial_tree_counts);
}

TEST_CASE("worker count does not change the ensemble") {
    const EnsembleSpec spec = small_spec();
    const MaskEnsemble one = run_mask_ensemble(spec, 1);
    const MaskEnsemble four = run_mask_ensemble(spec, 4);
    CHECK(one.bits == four.bits);
    CHECK(one.sim_indices == four.sim_indices);
    CHECK(one.initial_tree_counts == four.initial_tree_counts);
}

TEST_CASE("shared initial condition: identical frame 0 across simulations") {
    const MaskEnsemble masks = run_mask_ensemble(small_spec());
    const auto first = masks.mask_at(0, 0);
    for (std::uint32_t s = 1; s < masks.n_sims; ++s) {
        CHECK(masks.mask_at(s, 0) == first);
        CHECK(masks.initial_tree_counts[s] == masks.initial_tree_counts[0]);
    }
}

TEST_CASE("s_level 0 collapses the ensemble to a single trajectory") {
    const MaskEnsemble masks = run_mask_ensemble(small_spec(0.0, 6));
    for (std::uint32_t s = 1; s < masks.n_sims; ++s) {
        for (int t = 0; t < masks.horizon; ++t) {
            CHECK(masks.mask_at(s, t) == masks.mask_at(0, t));
        }
    }
    const MicroStatMap micro = micro_stat_map(masks);
    for (double v : micro.values) CHECK((v == 0.0 || v == 1.0));
}

TEST_CASE("micro stat map equals per-cell burn frequencies") {
    const EnsembleSpec spec = small_spec();
    const MaskEnsemble masks = run_mask_ensemble(spec);
    const MicroStatMap micro = micro_stat_map(masks);
    REQUIRE(micro.values.size() == static_cast<std::size_t>(masks.horizon) * masks.cells());

    for (int t = 0; t < masks.horizon; t += 7) {
        for (std::size_t cell = 0; cell < masks.cells(); ++cell) {
            int burnt = 0;
            for (std::uint32_t s = 0; s < masks.n_sims; ++s) {
                burnt += masks.burnt(s, t, cell) ? 1 : 0;
            }
            const int r = static_cast<int>(cell) / masks.cols;
            const int c = static_cast<int>(cell) % masks.cols;
            CHECK(micro.at(t, r, c) ==
                  doctest::Approx(static_cast<double>(burnt) / masks.n_sims));
        }
    }
}

TEST_CASE("macro series matches brute-force moments") {
    const EnsembleSpec spec = small_spec();
    const MaskEnsemble masks = run_mask_ensemble(spec);
    const MacroSeries series = macro_series(masks);
    REQUIRE(series.horizon() == masks.horizon);
    REQUIRE(series.n_sims() == static_cast<int>(masks.n_sims));

    for (int t = 0; t < masks.horizon; ++t) {
        double sum = 0.0, sum_u = 0.0;
        for (std::uint32_t s = 0; s < masks.n_sims; ++s) {
            const long long burnt = masks.burnt_count(s, t);
            CHECK(series.burnt_samples[t][s] == burnt);
            CHECK(series.unburnt_sample(t, s) ==
                  masks.initial_tree_counts[s] - burnt);  // integer identity
            sum += static_cast<double>(burnt);
            sum_u += static_cast<double>(masks.initial_tree_counts[s] - burnt);
        }
        const double mean = sum / masks.n_sims;
        const double mean_u = sum_u / masks.n_sims;
        double ss = 0.0, ss_u = 0.0;
        for (std::uint32_t s = 0; s < masks.n_sims; ++s) {
            ss += std::pow(series.burnt_samples[t][s] - mean, 2);
            ss_u += std::pow(series.unburnt_sample(t, s) - mean_u, 2);
        }
        CHECK(series.mean_burnt[t] == doctest::Approx(mean).epsilon(1e-12));
        CHECK(series.var_burnt[t] == doctest::Approx(ss / masks.n_sims).epsilon(1e-9));
        CHECK(series.mean_unburnt[t] == doctest::Approx(mean_u).epsilon(1e-12));
        CHECK(series.var_unburnt[t] == doctest::Approx(ss_u / masks.n_sims).epsilon(1e-9));
    }
}

TEST_CASE("with a shared initial condition the two variances coincide") {
    // unburnt = const - burnt, so Var is identical.
    const MacroSeries series = macro_series(run_mask_ensemble(small_spec()));
    for (int t = 0; t < series.horizon(); ++t) {
        CHECK(series.var_unburnt[t] == doctest::Approx(series.var_burnt[t]).epsilon(1e-9));
    }
}

TEST_CASE("mean burnt count never decreases over time") {
    const MacroSeries series = macro_series(run_mask_ensemble(small_spec(35.0)));
    for (int t = 1; t < series.horizon(); ++t) {
        CHECK(series.mean_burnt[t] >= series.mean_burnt[t - 1]);
    }
}

TEST_CASE("steady state detection on a synthetic series") {
    MacroSeries series;
    // 1000-cell grid, tol = 1.0: deltas 50,50,50 then small ones.
    series.mean_burnt = {0, 50, 100, 150, 150.5, 150.9, 151.2, 151.4, 151.5, 151.55};
    CHECK(steady_state_timestep(series, 1000) == 8);  // five quiet deltas end at t=8

    MacroSeries never;
    never.mean_burnt = {0, 50, 100, 150, 200, 250};
    CHECK(steady_state_timestep(never, 1000) == 5);  // falls back to T-1

    MacroSeries flat;
    flat.mean_burnt = {10, 10, 10, 10, 10, 10, 10};
    CHECK(steady_state_timestep(flat, 1000) == 5);
}

TEST_CASE("steady state histogram bins unburnt counts") {
    MacroSeries series;
    series.initial_tree_counts = {0, 1, 2, 3, 4, 8};
    series.burnt_samples = {{0, 0, 0, 0, 0, 0}};
    series.mean_burnt = {0.0};

    const Histogram h = steady_state_histogram(series, 0, 4);
    REQUIRE(h.counts.size() == 4);
    CHECK(h.bin_lo[0] == doctest::Approx(0.0));
    CHECK(h.bin_hi[3] == doctest::Approx(8.0));
    CHECK(h.counts == std::vector<long long>{2, 2, 1, 1});

    // Degenerate range: everything lands in bin 0.
    MacroSeries flat;
    flat.initial_tree_counts = {5, 5, 5};
    flat.burnt_samples = {{0, 0, 0}};
    flat.mean_burnt = {0.0};
    const Histogram h2 = steady_state_histogram(flat, 0, 30);
    CHECK(h2.counts[0] == 3);
    long long total = 0;
    for (auto c : h2.counts) total += c;
    CHECK(total == 3);
}

TEST_CASE("default histogram uses 30 bins and counts every simulation") {
    const MacroSeries series = macro_series(run_mask_ensemble(small_spec(30.0, 10)));
    const Histogram h = steady_state_histogram(series, series.horizon() - 1);
    CHECK(h.counts.size() == 30);
    long long total = 0;
    for (auto c : h.counts) total += c;
    CHECK(total == 10);
}

TEST_CASE("split keeps halves disjoint and preserves identity") {
    const MaskEnsemble masks = run_mask_ensemble(small_spec(20.0, 10));
    const EnsembleSplit split = split_ensemble(masks, 0.5);
    CHECK(split.train.n_sims == 5);
    CHECK(split.eval.n_sims == 5);
    CHECK(split.train.master_seed == masks.master_seed);
    CHECK(split.eval.s_level == masks.s_level);

    for (std::uint32_t i = 0; i < 5; ++i) {
        CHECK(split.train.sim_indices[i] == masks.sim_indices[i]);
        CHECK(split.eval.sim_indices[i] == masks.sim_indices[i + 5]);
        for (int t = 0; t < masks.horizon; t += 9) {
            CHECK(split.train.mask_at(i, t) == masks.mask_at(i, t));
            CHECK(split.eval.mask_at(i, t) == masks.mask_at(i + 5, t));
        }
    }

    CHECK_THROWS_AS(split_ensemble(masks, 0.0), InputError);
    CHECK_THROWS_AS(split_ensemble(masks, 1.0), InputError);
    const MaskEnsemble tiny = run_mask_ensemble(small_spec(20.0, 1));
    CHECK_THROWS_AS(split_ensemble(tiny, 0.5), InputError);
}

TEST_CASE("subset validates positions") {
    const MaskEnsemble masks = run_mask_ensemble(small_spec(20.0, 4));
    CHECK_THROWS_AS(masks.subset({0, 9}), InputError);
    const MaskEnsemble one = masks.subset({2});
    CHECK(one.n_sims == 1);
    CHECK(one.sim_indices[0] == masks.sim_indices[2]);
}

TEST_CASE("add_trace rejects mismatched traces") {
    const EnsembleSpec spec = small_spec(20.0, 2);
    std::vector<SimulationTrace> traces = run_ensemble(spec);
    MaskEnsemble masks;
    masks.add_trace(traces[0]);

    SimulationTrace other = traces[1];
    other.config.master_seed = 999;
    CHECK_THROWS_AS(masks.add_trace(other), InputError);

    SimulationTrace wrong_level = traces[1];
    wrong_level.config.s_level = 55.0;
    CHECK_THROWS_AS(masks.add_trace(wrong_level), InputError);

    // A longer trace cannot fit the horizon fixed by the first one.
    SimulationTrace longer = traces[1];
    pad_trace(longer, masks.horizon + 5);
    CHECK_THROWS_AS(masks.add_trace(longer), InputError);
}

TEST_CASE("shorter traces repeat their final frame up to the horizon") {
    EnsembleSpec spec = small_spec(0.0, 1);
    std::vector<SimulationTrace> traces = run_ensemble(spec);
    REQUIRE(traces[0].frames.size() == static_cast<std::size_t>(spec.horizon()));

    // Re-pack the unpadded trace against a longer horizon.
    SimulationTrace trimmed = traces[0];
    trimmed.frames.resize(10);
    MaskEnsemble masks;
    masks.horizon = 25;
    masks.add_trace(trimmed);
    for (int t = 10; t < 25; ++t) {
        CHECK(masks.mask_at(0, t) == masks.mask_at(0, 9));
    }
}

TEST_CASE("slevel sweep reuses the initial condition and reports steady stats") {
    EnsembleSpec spec = small_spec(0.0, 6);
    const auto results = slevel_sweep(spec, {0.0, 30.0}, /*keep_micro=*/false);
    REQUIRE(results.size() == 2);
    CHECK(results[0].s_level == 0.0);
    CHECK(results[1].s_level == 30.0);

    // Deterministic level: zero spread at the steady state.
    CHECK(results[0].steady_sd_burnt == doctest::Approx(0.0));
    CHECK(results[0].micro.values.empty());

    CHECK(results[0].steady_t >= 0);
    CHECK(results[0].steady_t < results[0].series.horizon());
}

TEST_CASE("spec validation") {
    EnsembleSpec spec = small_spec();
    CHECK_NOTHROW(spec.validate());
    spec.n_sims = 0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = small_spec();
    spec.pad_to = -1;
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    CHECK(small_spec().horizon() == 40);
    EnsembleSpec padded = small_spec();
    padded.pad_to = 77;
    CHECK(padded.horizon() == 77);
}
