#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stochfire/ensemble.hpp"
#include "stochfire/forecasters.hpp"
#include "stochfire/metrics.hpp"

namespace stochfire {

// Metrics scoreable against a probability forecast.
const std::vector<std::string>& forecast_metrics();
bool is_known_metric(const std::string& name);

// Scores one realization frame against one forecast frame; nullopt when the
// metric's denominator is empty on this frame.
std::optional<double> score_frame(const std::string& metric,
                                  const std::vector<double>& forecast,
                                  const std::vector<std::uint8_t>& mask, double tau = 0.5,
                                  int ece_bins = 10);

// Per-cell pooled view of every evaluation realization at one timestep:
// cell i has forecast score[i] and burned in pos[i] of tot[i] realizations.
struct PooledCells {
    std::vector<double> score;
    std::vector<long long> pos;
    std::vector<long long> tot;
    long long outcomes() const;
};
PooledCells pool_at(const MaskEnsemble& eval, const ForecastMap& forecast, int t);
std::optional<double> score_pooled(const std::string& metric, const PooledCells& cells,
                                   double tau = 0.5, int ece_bins = 10);

struct ExperimentConfig {
    EnsembleSpec base;
    std::vector<double> s_levels = {0, 5, 10, 15, 20};     // test-case levels
    std::vector<double> sweep_levels = {0,  5,  10, 15, 20, 25,
                                        30, 35, 40, 45, 50};  // full sweep
    double train_ratio = 0.5;
    int t0 = 10;     // observation cutoff; evaluation starts at t0 + 1
    int t_end = 60;  // last evaluated timestep
    double tau = 0.5;
    int ece_bins = 10;
    int variance_bins = 20;
    int dc_delta = 5;
    int dc_bins = 10;
    int n_resamples = 1000;
    double mismatch_level = 10.0;  // trains oracle A for the cross-level study
    std::vector<std::string> metrics = {"precision", "recall", "f1",
                                        "auc_pr",    "mse",    "ece"};
    int workers = 1;

    void validate() const;
};

// Backs fig4_time_stratified.csv: pools every evaluation realization's cells
// at each t and scores the pool once per metric.
std::vector<MetricReportRow> time_stratified_eval(const MaskEnsemble& eval,
                                                  const ForecastMap& forecast,
                                                  const std::vector<std::string>& metrics,
                                                  int t_lo, int t_hi, double tau = 0.5,
                                                  int ece_bins = 10);

// Backs fig6_sd_vs_var.csv: per-(realization, timestep) scores binned by
// Var[Z_t].
struct VarianceBinnedStat {
    struct Cell {
        std::optional<double> mean;
        std::optional<double> sd;  // population SD over the bin's frame scores
        long long support = 0;
    };
    std::vector<double> bin_lo;
    std::vector<double> bin_hi;
    std::vector<std::string> metrics;
    std::vector<std::vector<Cell>> stats;  // [metric][bin]
    long long pairs_total = 0;             // (realization, timestep) pairs in window
};
VarianceBinnedStat variance_sensitivity(const MaskEnsemble& eval,
                                        const ForecastMap& forecast,
                                        const MacroSeries& series,
                                        const std::vector<std::string>& metrics,
                                        int n_bins, int t_lo, int t_hi, double tau = 0.5,
                                        int ece_bins = 10);

// Backs fig7_calibration.csv: fits the oracle on the training half, then
// reports the pooled calibration curve/ECE on the evaluation half plus the
// per-(t, cell) identity scatter of evaluation statistic vs forecast.
struct CalibrationCheck {
    CalibrationCurve curve;  // pooled over the evaluation window
    double ece_overall = 0.0;
    std::vector<int> ts;
    std::vector<double> ece_per_t;
    std::vector<int> scatter_t;
    std::vector<double> scatter_stat;
    std::vector<double> scatter_forecast;
};
CalibrationCheck oracle_calibration_check(const MaskEnsemble& train,
                                          const MaskEnsemble& eval, int m, int t_lo,
                                          int t_hi);

// Backs table3_dc_stratified.csv, on one-step-ahead pairs: (mask_t, mask_{t+delta})
// stratified by their Dice coefficient. A null forecast scores per-pair
// persistence (the pair's own mask_t); otherwise the forecast frame at
// t+delta is scored. Emits n_bins rows per metric plus an Overall row.
std::vector<MetricReportRow> dc_stratified_eval(const MaskEnsemble& eval,
                                                const ForecastMap* forecast, int delta,
                                                int t_lo, int t_hi, int n_bins,
                                                const std::vector<std::string>& metrics,
                                                double tau, int ece_bins, int n_resamples,
                                                std::uint64_t bootstrap_seed);

// Backs fig10_cross_slevel.csv: two oracles scored on the same held-out
// realizations.
struct CrossLevelReport {
    struct Series {
        double s_level = 0.0;
        std::vector<std::optional<double>> auc_pr;  // per-t mean of frame AUC-PRs
        std::vector<std::optional<double>> auc_pr_lo;
        std::vector<std::optional<double>> auc_pr_hi;
        std::vector<double> mse;  // pooled per t
        std::vector<double> ece;  // pooled per t
        double ece_overall = 0.0;
    };
    std::vector<int> ts;
    Series a;  // typically the mismatched oracle
    Series b;  // the matched oracle
};
CrossLevelReport cross_slevel_eval(const ForecastMap& oracle_a, const ForecastMap& oracle_b,
                                   const MaskEnsemble& eval_b, int t_lo, int t_hi,
                                   int n_resamples, std::uint64_t bootstrap_seed);

// Runs one named experiment end to end and writes its CSVs plus a manifest
// into out_dir. Kinds: sweep, time_stratified, variance_sensitivity,
// calibration, dc_table, cross_slevel. The manifest is written even when the
// experiment fails.
void run_experiment(const std::string& kind, const ExperimentConfig& cfg,
                    const std::filesystem::path& out_dir, bool force);

void write_metric_report_csv(const std::filesystem::path& path,
                             const std::vector<MetricReportRow>& rows);

}  // namespace stochfire
