#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stochfire/ensemble.hpp"
#include "stochfire/errors.hpp"
#include "stochfire/forecasters.hpp"

using namespace stochfire;

namespace {

EnsembleSpec small_spec(double s_level = 20.0, int n_sims = 8,
                        std::uint64_t seed = 321) {
    EnsembleSpec spec;
    spec.config.rows = 10;
    spec.config.cols = 10;
    spec.config.s_level = s_level;
    spec.config.max_steps = 30;
    spec.config.master_seed = seed;
    spec.n_sims = n_sims;
    return spec;
}

}  // namespace

TEST_CASE("oracle forecast is the training half's burn-frequency map") {
    const MaskEnsemble full = run_mask_ensemble(small_spec());
    const EnsembleSplit split = split_ensemble(full, 0.5);
    const ForecastMap oracle = oracle_forecast(split.train);

    CHECK(oracle.kind == "oracle");
    CHECK(oracle.holdout_required);
    CHECK(oracle.horizon == split.train.horizon);
    CHECK(oracle.rows == 10);
    CHECK(oracle.cols == 10);
    CHECK(oracle.source_master_seed == full.master_seed);
    CHECK(oracle.source_s_level == full.s_level);
    CHECK(oracle.source_sims == split.train.sim_indices);

    const MicroStatMap stat = micro_stat_map(split.train);
    CHECK(oracle.values == stat.values);
    for (double v : oracle.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("contamination guard fires on any shared simulation") {
    const MaskEnsemble full = run_mask_ensemble(small_spec());
    const EnsembleSplit split = split_ensemble(full, 0.5);
    const ForecastMap oracle = oracle_forecast(split.train);

    CHECK_NOTHROW(check_no_contamination(oracle, split.eval));
    CHECK_THROWS_AS(check_no_contamination(oracle, split.train), ContaminationError);
    CHECK_THROWS_AS(check_no_contamination(oracle, full), ContaminationError);

    // One overlapping sim is enough.
    const MaskEnsemble mixed = full.subset({0, 5, 6});
    CHECK_THROWS_AS(check_no_contamination(oracle, mixed), ContaminationError);
}

TEST_CASE("guard treats a different master seed or level as a different process") {
    const MaskEnsemble a = run_mask_ensemble(small_spec(20.0, 4, 321));
    const ForecastMap oracle = oracle_forecast(a);

    const MaskEnsemble other_seed = run_mask_ensemble(small_spec(20.0, 4, 999));
    CHECK_NOTHROW(check_no_contamination(oracle, other_seed));

    const MaskEnsemble other_level = run_mask_ensemble(small_spec(30.0, 4, 321));
    CHECK_NOTHROW(check_no_contamination(oracle, other_level));
}

TEST_CASE("forecasts without provenance are exempt from the guard") {
    const MaskEnsemble full = run_mask_ensemble(small_spec());
    const ForecastMap c = constant_forecast(0.5, full.horizon, full.rows, full.cols);
    CHECK_FALSE(c.holdout_required);
    CHECK_NOTHROW(check_no_contamination(c, full));
}

TEST_CASE("mismatched oracle keeps provenance but flags its kind") {
    const MaskEnsemble at20 = run_mask_ensemble(small_spec(20.0));
    const MaskEnsemble at10 = run_mask_ensemble(small_spec(10.0));
    const EnsembleSplit split20 = split_ensemble(at20, 0.5);

    const ForecastMap mis = mismatched_oracle(at10, split20.eval);
    CHECK(mis.kind == "mismatched_oracle");
    CHECK(mis.holdout_required);
    CHECK(mis.source_s_level == 10.0);
    CHECK_NOTHROW(check_no_contamination(mis, split20.eval));

    // A different master seed is a different initial condition.
    const MaskEnsemble foreign = run_mask_ensemble(small_spec(10.0, 8, 777));
    CHECK_THROWS_AS(mismatched_oracle(foreign, split20.eval), InputError);
}

TEST_CASE("persistence forecast freezes the mask at t0") {
    EnsembleSpec spec = small_spec(20.0, 1);
    const std::vector<SimulationTrace> traces = run_ensemble(spec);
    const SimulationTrace& obs = traces[0];
    const int t0 = 5;
    const ForecastMap p = persistence_forecast(obs, t0);

    CHECK(p.kind == "persistence");
    CHECK_FALSE(p.holdout_required);
    CHECK(p.horizon == static_cast<int>(obs.frames.size()));

    for (int t = 0; t < p.horizon; ++t) {
        const auto mask = burnt_mask(obs.frames[std::min(t, t0)]);
        const auto frame = p.frame(t);
        for (std::size_t i = 0; i < mask.size(); ++i) {
            CHECK(frame[i] == doctest::Approx(mask[i] ? 1.0 : 0.0));
        }
    }

    CHECK_THROWS_AS(persistence_forecast(obs, 0), InputError);
    CHECK_THROWS_AS(persistence_forecast(obs, p.horizon), InputError);
}

TEST_CASE("constant forecast validates its arguments") {
    const ForecastMap c = constant_forecast(0.25, 4, 3, 3);
    CHECK(c.values.size() == 36);
    for (double v : c.values) CHECK(v == doctest::Approx(0.25));
    CHECK_THROWS_AS(constant_forecast(-0.1, 4, 3, 3), InputError);
    CHECK_THROWS_AS(constant_forecast(1.1, 4, 3, 3), InputError);
    CHECK_THROWS_AS(constant_forecast(0.5, 0, 3, 3), InputError);
}

TEST_CASE("forecast frame extraction is bounds-checked") {
    const ForecastMap c = constant_forecast(0.5, 4, 3, 3);
    CHECK(c.frame(0).size() == 9);
    CHECK(c.frame(3).size() == 9);
    CHECK_THROWS_AS(c.frame(-1), InputError);
    CHECK_THROWS_AS(c.frame(4), InputError);
}

TEST_CASE("deterministic process: oracle equals every realization") {
    const MaskEnsemble full = run_mask_ensemble(small_spec(0.0, 6));
    const EnsembleSplit split = split_ensemble(full, 0.5);
    const ForecastMap oracle = oracle_forecast(split.train);
    for (double v : oracle.values) CHECK((v == 0.0 || v == 1.0));
    for (int t = 0; t < full.horizon; ++t) {
        const auto frame = oracle.frame(t);
        const auto mask = split.eval.mask_at(0, t);
        for (std::size_t i = 0; i < mask.size(); ++i) {
            CHECK(frame[i] == doctest::Approx(mask[i] ? 1.0 : 0.0));
        }
    }
}
