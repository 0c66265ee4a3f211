#include "stochfire/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "stochfire/config_json.hpp"
#include "stochfire/csv.hpp"
#include "stochfire/errors.hpp"
#include "stochfire/manifest.hpp"
#include "stochfire/rng.hpp"

namespace stochfire {

namespace fs = std::filesystem;

const std::vector<std::string>& forecast_metrics() {
    static const std::vector<std::string> names = {"precision", "recall",  "f1",
                                                   "accuracy",  "auc_pr",  "auc_roc",
                                                   "mse",       "ece"};
    return names;
}

bool is_known_metric(const std::string& name) {
    const auto& names = forecast_metrics();
    return std::find(names.begin(), names.end(), name) != names.end();
}

namespace {

void check_metric_names(const std::vector<std::string>& metrics) {
    if (metrics.empty()) throw ConfigError("metric list is empty");
    for (const auto& m : metrics) {
        if (!is_known_metric(m)) {
            std::string valid;
            for (const auto& k : forecast_metrics()) valid += (valid.empty() ? "" : ", ") + k;
            throw ConfigError("unknown metric \"" + m + "\" (valid: " + valid + ")");
        }
    }
}

void check_window(int t_lo, int t_hi, int horizon) {
    if (t_lo < 0 || t_hi < t_lo || t_hi >= horizon) {
        throw InputError("evaluation window [" + std::to_string(t_lo) + ", " +
                         std::to_string(t_hi) + "] does not fit a horizon of " +
                         std::to_string(horizon));
    }
}

void check_forecast_shape(const ForecastMap& f, const MaskEnsemble& eval) {
    if (f.rows != eval.rows || f.cols != eval.cols || f.horizon < eval.horizon) {
        throw InputError("forecast shape does not cover the evaluation ensemble");
    }
}

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / xs.size();
}

double population_sd(const std::vector<double>& xs) {
    const double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) {
        const double d = x - m;
        ss += d * d;
    }
    return std::sqrt(ss / xs.size());
}

}  // namespace

void ExperimentConfig::validate() const {
    base.validate();
    if (s_levels.empty() || sweep_levels.empty()) {
        throw ConfigError("S-Level lists must be nonempty");
    }
    for (double s : s_levels) {
        if (s < 0.0 || s > 100.0) throw ConfigError("S-Level outside [0, 100]");
    }
    if (train_ratio <= 0.0 || train_ratio >= 1.0) {
        throw ConfigError("train_ratio must lie inside (0, 1)");
    }
    if (t0 < 1 || t_end <= t0) throw ConfigError("need 1 <= t0 < t_end");
    if (tau < 0.0 || tau > 1.0) throw ConfigError("tau must lie in [0, 1]");
    if (ece_bins < 1 || variance_bins < 1 || dc_bins < 1) {
        throw ConfigError("bin counts must be positive");
    }
    if (dc_delta < 1) throw ConfigError("dc_delta must be positive");
    if (n_resamples < 1) throw ConfigError("n_resamples must be positive");
    check_metric_names(metrics);
    if (workers < 1) throw ConfigError("workers must be at least 1");
}

std::optional<double> score_frame(const std::string& metric,
                                  const std::vector<double>& forecast,
                                  const std::vector<std::uint8_t>& mask, double tau,
                                  int ece_bins) {
    if (metric == "auc_pr") return auc_pr(forecast, mask);
    if (metric == "auc_roc") return auc_roc(forecast, mask);
    if (metric == "mse") return mse(forecast, mask);
    if (metric == "ece") return ece(forecast, mask, ece_bins);
    const ConfusionCounts c = confusion(apply_threshold(forecast, tau), mask);
    if (metric == "precision") return precision(c);
    if (metric == "recall") return recall(c);
    if (metric == "accuracy") return accuracy(c);
    if (metric == "f1") return f1(c);
    throw ConfigError("unknown metric \"" + metric + "\"");
}

long long PooledCells::outcomes() const {
    long long n = 0;
    for (long long t : tot) n += t;
    return n;
}

PooledCells pool_at(const MaskEnsemble& eval, const ForecastMap& forecast, int t) {
    check_forecast_shape(forecast, eval);
    check_no_contamination(forecast, eval);
    if (t < 0 || t >= eval.horizon) throw InputError("pooled timestep out of range");
    PooledCells cells;
    cells.score = forecast.frame(t);
    cells.pos.assign(eval.cells(), 0);
    cells.tot.assign(eval.cells(), eval.n_sims);
    for (std::uint32_t sim = 0; sim < eval.n_sims; ++sim) {
        const std::uint64_t* frame = eval.bits.data() + eval.frame_offset(sim, t);
        for (std::size_t w = 0; w < eval.words_per_frame(); ++w) {
            std::uint64_t word = frame[w];
            while (word) {
                const int b = std::countr_zero(word);
                word &= word - 1;
                ++cells.pos[w * 64 + b];
            }
        }
    }
    return cells;
}

std::optional<double> score_pooled(const std::string& metric, const PooledCells& cells,
                                   double tau, int ece_bins) {
    if (metric == "auc_pr" || metric == "auc_roc") {
        std::vector<ScoreGroup> groups(cells.score.size());
        for (std::size_t i = 0; i < cells.score.size(); ++i) {
            groups[i] = {cells.score[i], cells.pos[i], cells.tot[i]};
        }
        return metric == "auc_pr" ? auc_pr_grouped(std::move(groups))
                                  : auc_roc_grouped(std::move(groups));
    }
    if (metric == "mse") return pooled_mse(cells.score, cells.pos, cells.tot);
    if (metric == "ece") return pooled_ece(cells.score, cells.pos, cells.tot, ece_bins);
    const ConfusionCounts c = pooled_confusion(cells.score, cells.pos, cells.tot, tau);
    if (metric == "precision") return precision(c);
    if (metric == "recall") return recall(c);
    if (metric == "accuracy") return accuracy(c);
    if (metric == "f1") return f1(c);
    throw ConfigError("unknown metric \"" + metric + "\"");
}

std::vector<MetricReportRow> time_stratified_eval(const MaskEnsemble& eval,
                                                  const ForecastMap& forecast,
                                                  const std::vector<std::string>& metrics,
                                                  int t_lo, int t_hi, double tau,
                                                  int ece_bins) {
    check_metric_names(metrics);
    check_window(t_lo, t_hi, eval.horizon);
    check_no_contamination(forecast, eval);
    std::vector<MetricReportRow> rows;
    for (int t = t_lo; t <= t_hi; ++t) {
        const PooledCells cells = pool_at(eval, forecast, t);
        for (const auto& m : metrics) {
            MetricReportRow row;
            row.stratum_kind = "timestep";
            row.stratum_lo = row.stratum_hi = t;
            row.metric = m;
            row.value = score_pooled(m, cells, tau, ece_bins);
            row.support = row.value ? cells.outcomes() : 0;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

VarianceBinnedStat variance_sensitivity(const MaskEnsemble& eval,
                                        const ForecastMap& forecast,
                                        const MacroSeries& series,
                                        const std::vector<std::string>& metrics,
                                        int n_bins, int t_lo, int t_hi, double tau,
                                        int ece_bins) {
    check_metric_names(metrics);
    check_window(t_lo, t_hi, eval.horizon);
    check_no_contamination(forecast, eval);
    if (series.horizon() < eval.horizon) {
        throw InputError("macro series is shorter than the evaluation horizon");
    }
    if (n_bins < 1) throw InputError("variance binning needs at least 1 bin");

    double var_lo = series.var_burnt[t_lo], var_hi = series.var_burnt[t_lo];
    for (int t = t_lo; t <= t_hi; ++t) {
        var_lo = std::min(var_lo, series.var_burnt[t]);
        var_hi = std::max(var_hi, series.var_burnt[t]);
    }
    const double width = (var_hi - var_lo) / n_bins;

    VarianceBinnedStat out;
    out.metrics = metrics;
    for (int b = 0; b < n_bins; ++b) {
        out.bin_lo.push_back(var_lo + b * width);
        out.bin_hi.push_back(b + 1 == n_bins ? var_hi : var_lo + (b + 1) * width);
    }
    // values[m][b] collects the per-frame scores landing in bin b
    std::vector<std::vector<std::vector<double>>> values(
        metrics.size(), std::vector<std::vector<double>>(n_bins));

    for (int t = t_lo; t <= t_hi; ++t) {
        int b = width > 0.0 ? static_cast<int>((series.var_burnt[t] - var_lo) / width) : 0;
        b = std::clamp(b, 0, n_bins - 1);
        const std::vector<double> fc = forecast.frame(t);
        for (std::uint32_t sim = 0; sim < eval.n_sims; ++sim) {
            const auto mask = eval.mask_at(sim, t);
            ++out.pairs_total;
            for (std::size_t m = 0; m < metrics.size(); ++m) {
                const auto v = score_frame(metrics[m], fc, mask, tau, ece_bins);
                if (v) values[m][b].push_back(*v);
            }
        }
    }
    out.stats.assign(metrics.size(), std::vector<VarianceBinnedStat::Cell>(n_bins));
    for (std::size_t m = 0; m < metrics.size(); ++m) {
        for (int b = 0; b < n_bins; ++b) {
            auto& cell = out.stats[m][b];
            cell.support = static_cast<long long>(values[m][b].size());
            if (cell.support > 0) {
                cell.mean = mean_of(values[m][b]);
                cell.sd = population_sd(values[m][b]);
            }
        }
    }
    return out;
}

CalibrationCheck oracle_calibration_check(const MaskEnsemble& train,
                                          const MaskEnsemble& eval, int m, int t_lo,
                                          int t_hi) {
    check_window(t_lo, t_hi, eval.horizon);
    const ForecastMap forecast = oracle_forecast(train);
    check_no_contamination(forecast, eval);
    const MicroStatMap eval_stat = micro_stat_map(eval);

    CalibrationCheck out;
    std::vector<double> score;
    std::vector<long long> pos, tot;
    for (int t = t_lo; t <= t_hi; ++t) {
        const PooledCells cells = pool_at(eval, forecast, t);
        out.ts.push_back(t);
        out.ece_per_t.push_back(pooled_ece(cells.score, cells.pos, cells.tot, m));
        score.insert(score.end(), cells.score.begin(), cells.score.end());
        pos.insert(pos.end(), cells.pos.begin(), cells.pos.end());
        tot.insert(tot.end(), cells.tot.begin(), cells.tot.end());
        for (std::size_t i = 0; i < cells.score.size(); ++i) {
            out.scatter_t.push_back(t);
            out.scatter_forecast.push_back(cells.score[i]);
            out.scatter_stat.push_back(
                eval_stat.values[static_cast<std::size_t>(t) * eval.cells() + i]);
        }
    }
    out.curve = pooled_calibration_curve(score, pos, tot, m);
    out.ece_overall = pooled_ece(score, pos, tot, m);
    return out;
}

std::vector<MetricReportRow> dc_stratified_eval(const MaskEnsemble& eval,
                                                const ForecastMap* forecast, int delta,
                                                int t_lo, int t_hi, int n_bins,
                                                const std::vector<std::string>& metrics,
                                                double tau, int ece_bins, int n_resamples,
                                                std::uint64_t bootstrap_seed) {
    check_metric_names(metrics);
    check_window(t_lo, t_hi, eval.horizon);
    if (delta < 1 || t_lo + delta > t_hi) {
        throw InputError("dc_delta leaves no (mask_t, mask_{t+delta}) pairs");
    }
    if (forecast) {
        check_forecast_shape(*forecast, eval);
        check_no_contamination(*forecast, eval);
    }

    // values[m][b] holds per-pair scores; bin n_bins is the Overall bucket.
    std::vector<std::vector<std::vector<double>>> values(
        metrics.size(), std::vector<std::vector<double>>(n_bins + 1));
    for (std::uint32_t sim = 0; sim < eval.n_sims; ++sim) {
        for (int t = t_lo; t + delta <= t_hi; ++t) {
            const auto current = eval.mask_at(sim, t);
            const auto target = eval.mask_at(sim, t + delta);
            const auto dc = dice(current, target);
            if (!dc) continue;  // both masks empty: no pair to stratify
            int b = static_cast<int>(*dc * n_bins);
            b = std::clamp(b, 0, n_bins - 1);

            std::vector<double> fc;
            if (forecast) {
                fc = forecast->frame(t + delta);
            } else {
                fc.assign(current.begin(), current.end());  // per-pair persistence
            }
            for (std::size_t m = 0; m < metrics.size(); ++m) {
                const auto v = score_frame(metrics[m], fc, target, tau, ece_bins);
                if (v) {
                    values[m][b].push_back(*v);
                    values[m][n_bins].push_back(*v);
                }
            }
        }
    }

    std::vector<MetricReportRow> rows;
    for (std::size_t m = 0; m < metrics.size(); ++m) {
        for (int b = 0; b <= n_bins; ++b) {
            MetricReportRow row;
            if (b < n_bins) {
                row.stratum_kind = "dc";
                row.stratum_lo = static_cast<double>(b) / n_bins;
                row.stratum_hi = static_cast<double>(b + 1) / n_bins;
            } else {
                row.stratum_kind = "overall";
                row.stratum_lo = 0.0;
                row.stratum_hi = 1.0;
            }
            row.metric = metrics[m];
            const auto& xs = values[m][b];
            row.support = static_cast<long long>(xs.size());
            if (!xs.empty()) {
                row.value = mean_of(xs);
                const auto ci = bootstrap_ci(
                    xs, n_resamples, 0.95,
                    substream_seed(bootstrap_seed, RngDomain::bootstrap,
                                   m * (n_bins + 1) + static_cast<std::size_t>(b)));
                if (ci) {
                    row.ci_lo = ci->first;
                    row.ci_hi = ci->second;
                }
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

CrossLevelReport cross_slevel_eval(const ForecastMap& oracle_a, const ForecastMap& oracle_b,
                                   const MaskEnsemble& eval_b, int t_lo, int t_hi,
                                   int n_resamples, std::uint64_t bootstrap_seed) {
    check_window(t_lo, t_hi, eval_b.horizon);
    check_no_contamination(oracle_a, eval_b);
    check_no_contamination(oracle_b, eval_b);
    if (oracle_a.source_master_seed != oracle_b.source_master_seed ||
        oracle_a.source_master_seed != eval_b.master_seed) {
        throw InputError("cross-level oracles must share the evaluation initial condition");
    }

    CrossLevelReport out;
    out.a.s_level = oracle_a.source_s_level;
    out.b.s_level = oracle_b.source_s_level;

    std::vector<double> score_a, score_b;
    std::vector<long long> pos_all, tot_all;
    auto eval_oracle = [&](const ForecastMap& oracle, CrossLevelReport::Series& series,
                           std::uint64_t seed_salt) {
        std::vector<double> window_score;
        std::vector<long long> window_pos, window_tot;
        for (int t = t_lo; t <= t_hi; ++t) {
            const PooledCells cells = pool_at(eval_b, oracle, t);
            series.mse.push_back(pooled_mse(cells.score, cells.pos, cells.tot));
            series.ece.push_back(pooled_ece(cells.score, cells.pos, cells.tot));
            window_score.insert(window_score.end(), cells.score.begin(), cells.score.end());
            window_pos.insert(window_pos.end(), cells.pos.begin(), cells.pos.end());
            window_tot.insert(window_tot.end(), cells.tot.begin(), cells.tot.end());

            const std::vector<double> fc = oracle.frame(t);
            std::vector<double> frame_values;
            for (std::uint32_t sim = 0; sim < eval_b.n_sims; ++sim) {
                const auto v = auc_pr(fc, eval_b.mask_at(sim, t));
                if (v) frame_values.push_back(*v);
            }
            if (frame_values.empty()) {
                series.auc_pr.push_back(std::nullopt);
                series.auc_pr_lo.push_back(std::nullopt);
                series.auc_pr_hi.push_back(std::nullopt);
            } else {
                series.auc_pr.push_back(mean_of(frame_values));
                const auto ci = bootstrap_ci(
                    frame_values, n_resamples, 0.95,
                    substream_seed(bootstrap_seed, RngDomain::bootstrap,
                                   seed_salt * 100000ULL + static_cast<std::uint64_t>(t)));
                series.auc_pr_lo.push_back(ci ? std::optional<double>(ci->first)
                                              : std::nullopt);
                series.auc_pr_hi.push_back(ci ? std::optional<double>(ci->second)
                                              : std::nullopt);
            }
        }
        series.ece_overall = pooled_ece(window_score, window_pos, window_tot);
    };

    for (int t = t_lo; t <= t_hi; ++t) out.ts.push_back(t);
    eval_oracle(oracle_a, out.a, 1);
    eval_oracle(oracle_b, out.b, 2);
    return out;
}

void write_metric_report_csv(const std::filesystem::path& path,
                             const std::vector<MetricReportRow>& rows) {
    CsvTable table;
    table.header = {"stratum_kind", "stratum_lo", "stratum_hi", "metric",
                    "value",        "support",    "ci_lo",      "ci_hi"};
    for (const auto& r : rows) {
        table.add_row({r.stratum_kind, csv_num(r.stratum_lo), csv_num(r.stratum_hi),
                       r.metric, csv_num(r.value), csv_num(r.support), csv_num(r.ci_lo),
                       csv_num(r.ci_hi)});
    }
    write_csv(path, table);
}

namespace {

EnsembleSpec scoped_spec(const ExperimentConfig& cfg, double s_level) {
    EnsembleSpec spec = cfg.base;
    spec.config.s_level = s_level;
    spec.config.max_steps = cfg.t_end + 1;
    spec.pad_to = cfg.t_end + 1;
    return spec;
}

struct OracleSplit {
    MaskEnsemble train;
    MaskEnsemble eval;
    ForecastMap forecast;
};

OracleSplit build_oracle_split(const ExperimentConfig& cfg, double s_level) {
    const MaskEnsemble full = run_mask_ensemble(scoped_spec(cfg, s_level), cfg.workers);
    EnsembleSplit split = split_ensemble(full, cfg.train_ratio);
    OracleSplit out{std::move(split.train), std::move(split.eval), {}};
    out.forecast = oracle_forecast(out.train);
    return out;
}

void run_sweep(const ExperimentConfig& cfg, const fs::path& dir,
               ManifestBuilder& manifest) {
    const auto results =
        slevel_sweep(scoped_spec(cfg, cfg.base.config.s_level), cfg.sweep_levels,
                     /*keep_micro=*/false, cfg.workers);

    CsvTable macro;
    macro.header = {"s_level", "t",            "mean_burnt",  "var_burnt",
                    "mean_unburnt", "var_unburnt"};
    CsvTable hist;
    hist.header = {"s_level", "steady_t", "bin_lo", "bin_hi", "count"};
    CsvTable steady;
    steady.header = {"s_level", "steady_t", "sd_burnt"};
    for (const auto& r : results) {
        for (int t = 0; t < r.series.horizon(); ++t) {
            macro.add_row({csv_num(r.s_level), csv_num(static_cast<long long>(t)),
                           csv_num(r.series.mean_burnt[t]), csv_num(r.series.var_burnt[t]),
                           csv_num(r.series.mean_unburnt[t]),
                           csv_num(r.series.var_unburnt[t])});
        }
        const Histogram h = steady_state_histogram(r.series, r.steady_t);
        for (std::size_t b = 0; b < h.counts.size(); ++b) {
            hist.add_row({csv_num(r.s_level), csv_num(static_cast<long long>(r.steady_t)),
                          csv_num(h.bin_lo[b]), csv_num(h.bin_hi[b]),
                          csv_num(h.counts[b])});
        }
        steady.add_row({csv_num(r.s_level), csv_num(static_cast<long long>(r.steady_t)),
                        csv_num(r.steady_sd_burnt)});
    }
    write_csv(dir / "fig3a_macro.csv", macro);
    write_csv(dir / "fig3b_steady_hist.csv", hist);
    write_csv(dir / "fig3_steady_sd.csv", steady);
    manifest.add_output(dir / "fig3a_macro.csv");
    manifest.add_output(dir / "fig3b_steady_hist.csv");
    manifest.add_output(dir / "fig3_steady_sd.csv");
}

void run_time_stratified(const ExperimentConfig& cfg, const fs::path& dir,
                         ManifestBuilder& manifest) {
    CsvTable table;
    table.header = {"s_level", "t", "metric", "value", "support"};
    for (double level : cfg.s_levels) {
        const OracleSplit os = build_oracle_split(cfg, level);
        const auto rows = time_stratified_eval(os.eval, os.forecast, cfg.metrics,
                                               cfg.t0 + 1, cfg.t_end, cfg.tau, cfg.ece_bins);
        for (const auto& r : rows) {
            table.add_row({csv_num(level), csv_num(r.stratum_lo), r.metric,
                           csv_num(r.value), csv_num(r.support)});
        }
    }
    write_csv(dir / "fig4_time_stratified.csv", table);
    manifest.add_output(dir / "fig4_time_stratified.csv");
}

void run_variance_sensitivity(const ExperimentConfig& cfg, const fs::path& dir,
                              ManifestBuilder& manifest) {
    const OracleSplit os = build_oracle_split(cfg, cfg.base.config.s_level);
    const MacroSeries series = macro_series(os.eval);
    const VarianceBinnedStat stat =
        variance_sensitivity(os.eval, os.forecast, series, cfg.metrics, cfg.variance_bins,
                             cfg.t0 + 1, cfg.t_end, cfg.tau, cfg.ece_bins);
    CsvTable table;
    table.header = {"bin_lo", "bin_hi", "metric", "mean", "sd", "support"};
    for (std::size_t m = 0; m < stat.metrics.size(); ++m) {
        for (std::size_t b = 0; b < stat.bin_lo.size(); ++b) {
            const auto& cell = stat.stats[m][b];
            table.add_row({csv_num(stat.bin_lo[b]), csv_num(stat.bin_hi[b]),
                           stat.metrics[m], csv_num(cell.mean), csv_num(cell.sd),
                           csv_num(cell.support)});
        }
    }
    write_csv(dir / "fig6_sd_vs_var.csv", table);
    manifest.add_output(dir / "fig6_sd_vs_var.csv");
}

void run_calibration(const ExperimentConfig& cfg, const fs::path& dir,
                     ManifestBuilder& manifest) {
    const MaskEnsemble full =
        run_mask_ensemble(scoped_spec(cfg, cfg.base.config.s_level), cfg.workers);
    const EnsembleSplit split = split_ensemble(full, cfg.train_ratio);
    const CalibrationCheck check = oracle_calibration_check(split.train, split.eval,
                                                            cfg.ece_bins, cfg.t0 + 1,
                                                            cfg.t_end);
    CsvTable curve;
    curve.header = {"bin_lo", "bin_hi", "mean_pred", "mean_obs", "count"};
    for (std::size_t b = 0; b < check.curve.count.size(); ++b) {
        curve.add_row({csv_num(check.curve.bin_lo[b]), csv_num(check.curve.bin_hi[b]),
                       csv_num(check.curve.mean_pred[b]), csv_num(check.curve.mean_obs[b]),
                       csv_num(check.curve.count[b])});
    }
    write_csv(dir / "fig7_calibration.csv", curve);

    CsvTable per_t;
    per_t.header = {"t", "ece"};
    for (std::size_t i = 0; i < check.ts.size(); ++i) {
        per_t.add_row({csv_num(static_cast<long long>(check.ts[i])),
                       csv_num(check.ece_per_t[i])});
    }
    write_csv(dir / "fig4d_ece_per_t.csv", per_t);

    CsvTable scatter;
    scatter.header = {"t", "stat_gt", "forecast"};
    for (std::size_t i = 0; i < check.scatter_t.size(); ++i) {
        scatter.add_row({csv_num(static_cast<long long>(check.scatter_t[i])),
                         csv_num(check.scatter_stat[i]),
                         csv_num(check.scatter_forecast[i])});
    }
    write_csv(dir / "fig5_scatter.csv", scatter);

    CsvTable overall;
    overall.header = {"ece_overall"};
    overall.add_row({csv_num(check.ece_overall)});
    write_csv(dir / "fig7_ece_overall.csv", overall);

    manifest.add_output(dir / "fig7_calibration.csv");
    manifest.add_output(dir / "fig4d_ece_per_t.csv");
    manifest.add_output(dir / "fig5_scatter.csv");
    manifest.add_output(dir / "fig7_ece_overall.csv");
}

void run_dc_table(const ExperimentConfig& cfg, const fs::path& dir,
                  ManifestBuilder& manifest) {
    const EnsembleSpec spec = scoped_spec(cfg, cfg.base.config.s_level);
    const MaskEnsemble eval = run_mask_ensemble(spec, cfg.workers);
    const std::vector<std::string> table3_metrics = {"precision", "recall", "auc_pr",
                                                     "mse"};
    const auto rows =
        dc_stratified_eval(eval, nullptr, cfg.dc_delta, cfg.t0 + 1, cfg.t_end, cfg.dc_bins,
                           table3_metrics, cfg.tau, cfg.ece_bins, cfg.n_resamples,
                           spec.config.master_seed);
    write_metric_report_csv(dir / "table3_dc_stratified.csv", rows);
    manifest.add_output(dir / "table3_dc_stratified.csv");
}

void run_cross_slevel(const ExperimentConfig& cfg, const fs::path& dir,
                      ManifestBuilder& manifest) {
    const double level_b = cfg.base.config.s_level;
    const OracleSplit os_b = build_oracle_split(cfg, level_b);
    const MaskEnsemble train_a =
        run_mask_ensemble(scoped_spec(cfg, cfg.mismatch_level), cfg.workers);
    const ForecastMap oracle_a = mismatched_oracle(train_a, os_b.eval);

    const CrossLevelReport report =
        cross_slevel_eval(oracle_a, os_b.forecast, os_b.eval, cfg.t0 + 1, cfg.t_end,
                          cfg.n_resamples, cfg.base.config.master_seed);

    CsvTable table;
    table.header = {"oracle",   "s_level", "t",     "auc_pr", "auc_pr_ci_lo",
                    "auc_pr_ci_hi", "mse",     "ece"};
    auto emit = [&](const char* name, const CrossLevelReport::Series& s) {
        for (std::size_t i = 0; i < report.ts.size(); ++i) {
            table.add_row({name, csv_num(s.s_level),
                           csv_num(static_cast<long long>(report.ts[i])),
                           csv_num(s.auc_pr[i]), csv_num(s.auc_pr_lo[i]),
                           csv_num(s.auc_pr_hi[i]), csv_num(s.mse[i]), csv_num(s.ece[i])});
        }
    };
    emit("mismatched", report.a);
    emit("matched", report.b);
    write_csv(dir / "fig10_cross_slevel.csv", table);

    CsvTable overall;
    overall.header = {"oracle", "s_level", "ece_overall"};
    overall.add_row({"mismatched", csv_num(report.a.s_level),
                     csv_num(report.a.ece_overall)});
    overall.add_row({"matched", csv_num(report.b.s_level), csv_num(report.b.ece_overall)});
    write_csv(dir / "fig10_ece_overall.csv", overall);

    manifest.add_output(dir / "fig10_cross_slevel.csv");
    manifest.add_output(dir / "fig10_ece_overall.csv");
}

}  // namespace

void run_experiment(const std::string& kind, const ExperimentConfig& cfg,
                    const std::filesystem::path& out_dir, bool force) {
    cfg.validate();
    static const std::vector<std::string> kinds = {"sweep",
                                                   "time_stratified",
                                                   "variance_sensitivity",
                                                   "calibration",
                                                   "dc_table",
                                                   "cross_slevel"};
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
        std::string valid;
        for (const auto& k : kinds) valid += (valid.empty() ? "" : ", ") + k;
        throw ConfigError("unknown experiment kind \"" + kind + "\" (valid: " + valid + ")");
    }
    fs::create_directories(out_dir);
    const fs::path manifest_path = out_dir / "manifest.json";
    if (!force && fs::exists(manifest_path)) {
        throw InputError(manifest_path.string() + " exists; pass --force to overwrite");
    }

    nlohmann::json config_json = ensemble_spec_to_json(cfg.base);
    config_json["experiment"] = {{"kind", kind},
                                 {"s_levels", cfg.s_levels},
                                 {"sweep_levels", cfg.sweep_levels},
                                 {"train_ratio", cfg.train_ratio},
                                 {"t0", cfg.t0},
                                 {"t_end", cfg.t_end},
                                 {"tau", cfg.tau},
                                 {"ece_bins", cfg.ece_bins},
                                 {"variance_bins", cfg.variance_bins},
                                 {"dc_delta", cfg.dc_delta},
                                 {"dc_bins", cfg.dc_bins},
                                 {"n_resamples", cfg.n_resamples},
                                 {"mismatch_level", cfg.mismatch_level},
                                 {"metrics", cfg.metrics}};
    ManifestBuilder manifest("experiment " + kind, std::move(config_json));
    try {
        if (kind == "sweep") run_sweep(cfg, out_dir, manifest);
        else if (kind == "time_stratified") run_time_stratified(cfg, out_dir, manifest);
        else if (kind == "variance_sensitivity") run_variance_sensitivity(cfg, out_dir, manifest);
        else if (kind == "calibration") run_calibration(cfg, out_dir, manifest);
        else if (kind == "dc_table") run_dc_table(cfg, out_dir, manifest);
        else run_cross_slevel(cfg, out_dir, manifest);
    } catch (const std::exception& e) {
        manifest.set_failure(e.what());
        manifest.write(manifest_path);
        throw;
    }
    manifest.write(manifest_path);
}

}  // namespace stochfire
