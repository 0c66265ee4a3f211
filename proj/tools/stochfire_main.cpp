#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "stochfire/config_json.hpp"
#include "stochfire/csv.hpp"
#include "stochfire/ensemble.hpp"
#include "stochfire/errors.hpp"
#include "stochfire/experiments.hpp"
#include "stochfire/forecasters.hpp"
#include "stochfire/manifest.hpp"
#include "stochfire/metrics.hpp"
#include "stochfire/sim.hpp"
#include "stochfire/trace_io.hpp"

namespace fs = std::filesystem;
using namespace stochfire;

namespace {

std::string trace_name(std::uint32_t sim) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "trace_%05u.ffca", sim);
    return buf;
}

void refuse_existing(const fs::path& path, bool force) {
    if (!force && fs::exists(path)) {
        throw InputError(path.string() + " exists; pass --force to overwrite");
    }
}

// Loads every *.ffca in dir into one mask ensemble, enforcing a single
// shared config. Records the files read in the manifest.
MaskEnsemble load_trace_dir(const fs::path& dir, ManifestBuilder& manifest) {
    const auto files = list_trace_files(dir);
    if (files.empty()) throw InputError("no .ffca trace files in " + dir.string());
    MaskEnsemble ensemble;
    SimConfig first_config;
    for (std::size_t i = 0; i < files.size(); ++i) {
        SimulationTrace trace = read_trace(files[i]);
        if (i == 0) {
            first_config = trace.config;
        } else if (!(trace.config == first_config)) {
            throw InputError(files[i].string() +
                             ": header disagrees with " + files[0].string() +
                             " (all traces in a directory must share one config)");
        }
        ensemble.add_trace(trace);
        manifest.add_input(files[i]);
    }
    return ensemble;
}

struct SimulateArgs {
    std::string config_path;
    std::string out_dir;
    int sims = -1;
    double s_level = -1.0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 1;
    bool force = false;
};

int cmd_simulate(const SimulateArgs& args) {
    EnsembleSpec spec = load_spec_file(args.config_path);
    if (args.sims >= 0) spec.n_sims = args.sims;
    if (args.s_level >= 0.0) spec.config.s_level = args.s_level;
    if (args.seed_set) spec.config.master_seed = args.seed;
    spec.validate();

    const fs::path dir(args.out_dir);
    fs::create_directories(dir);
    refuse_existing(dir / "manifest.json", args.force);
    refuse_existing(dir / trace_name(0), args.force);

    std::vector<fs::path> written(spec.n_sims);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto run_range = [&](int begin, int stride) {
        try {
            for (int s = begin; s < spec.n_sims; s += stride) {
                SimulationTrace trace = run_simulation(spec.config,
                                                       static_cast<std::uint32_t>(s));
                pad_trace(trace, spec.horizon());
                const fs::path path = dir / trace_name(static_cast<std::uint32_t>(s));
                write_trace(path, trace);
                written[s] = path;
            }
        } catch (...) {
            std::scoped_lock lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    };
    const int n_workers = std::clamp(args.workers, 1, spec.n_sims);
    if (n_workers == 1) {
        run_range(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(run_range, w, n_workers);
        for (auto& t : pool) t.join();
    }
    if (first_error) {
        for (const auto& p : written) {
            if (!p.empty()) fs::remove(p);
        }
        std::rethrow_exception(first_error);
    }

    ManifestBuilder manifest("simulate", ensemble_spec_to_json(spec));
    for (const auto& p : written) manifest.add_output(p);
    manifest.write(dir / "manifest.json");
    return 0;
}

struct StatsArgs {
    std::string trace_dir;
    std::string out_dir;
    bool force = false;
};

int cmd_stats(const StatsArgs& args) {
    const fs::path dir(args.out_dir);
    fs::create_directories(dir);
    refuse_existing(dir / "manifest.json", args.force);

    ManifestBuilder manifest("stats", nlohmann::json::object());
    const MaskEnsemble ensemble = load_trace_dir(args.trace_dir, manifest);
    manifest.set_extra("n_sims", ensemble.n_sims);

    const MicroStatMap micro = micro_stat_map(ensemble);
    write_stat_map(dir / "stat_map.ffst", micro);

    const MacroSeries series = macro_series(ensemble);
    CsvTable macro;
    macro.header = {"t", "mean_burnt", "var_burnt", "mean_unburnt", "var_unburnt"};
    for (int t = 0; t < series.horizon(); ++t) {
        macro.add_row({csv_num(static_cast<long long>(t)), csv_num(series.mean_burnt[t]),
                       csv_num(series.var_burnt[t]), csv_num(series.mean_unburnt[t]),
                       csv_num(series.var_unburnt[t])});
    }
    write_csv(dir / "macro.csv", macro);

    const int steady_t = steady_state_timestep(series, ensemble.cells());
    const Histogram hist = steady_state_histogram(series, steady_t);
    CsvTable hist_table;
    hist_table.header = {"steady_t", "bin_lo", "bin_hi", "count"};
    for (std::size_t b = 0; b < hist.counts.size(); ++b) {
        hist_table.add_row({csv_num(static_cast<long long>(steady_t)),
                            csv_num(hist.bin_lo[b]), csv_num(hist.bin_hi[b]),
                            csv_num(hist.counts[b])});
    }
    write_csv(dir / "steady_hist.csv", hist_table);

    manifest.add_output(dir / "stat_map.ffst");
    manifest.add_output(dir / "macro.csv");
    manifest.add_output(dir / "steady_hist.csv");
    manifest.write(dir / "manifest.json");
    return 0;
}

struct EvaluateArgs {
    std::string forecast_path;
    std::string trace_dir;
    std::string out_dir;
    std::vector<std::string> metrics;
    std::string stratify = "time";
    double tau = 0.5;
    int t_lo = 0;
    int t_hi = -1;
    int delta = 5;
    int bins = 0;
    int ece_bins = 10;
    int resamples = 1000;
    bool force = false;
};

int cmd_evaluate(const EvaluateArgs& args) {
    if (args.stratify != "time" && args.stratify != "variance" && args.stratify != "dc") {
        throw ConfigError("unknown --stratify \"" + args.stratify +
                          "\" (valid: time, variance, dc)");
    }
    std::vector<std::string> metrics = args.metrics;
    if (metrics.empty()) metrics = forecast_metrics();
    for (const auto& m : metrics) {
        if (!is_known_metric(m)) {
            std::string valid;
            for (const auto& k : forecast_metrics()) valid += (valid.empty() ? "" : ", ") + k;
            throw ConfigError("unknown metric \"" + m + "\" (valid: " + valid + ")");
        }
    }

    const fs::path dir(args.out_dir);
    fs::create_directories(dir);
    refuse_existing(dir / "manifest.json", args.force);

    nlohmann::json config{{"forecast", args.forecast_path},
                          {"trace_dir", args.trace_dir},
                          {"stratify", args.stratify},
                          {"metrics", metrics},
                          {"tau", args.tau}};
    ManifestBuilder manifest("evaluate", std::move(config));

    const ForecastMap forecast = read_forecast(args.forecast_path);
    manifest.add_input(args.forecast_path);
    const MaskEnsemble ensemble = load_trace_dir(args.trace_dir, manifest);

    const int t_hi = args.t_hi >= 0 ? args.t_hi : ensemble.horizon - 1;
    const fs::path report = dir / ("report_" + args.stratify + ".csv");
    if (args.stratify == "time") {
        const auto rows = time_stratified_eval(ensemble, forecast, metrics, args.t_lo,
                                               t_hi, args.tau, args.ece_bins);
        write_metric_report_csv(report, rows);
    } else if (args.stratify == "variance") {
        const int bins = args.bins > 0 ? args.bins : 20;
        const MacroSeries series = macro_series(ensemble);
        const VarianceBinnedStat stat =
            variance_sensitivity(ensemble, forecast, series, metrics, bins, args.t_lo,
                                 t_hi, args.tau, args.ece_bins);
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
        write_csv(report, table);
    } else {
        const int bins = args.bins > 0 ? args.bins : 10;
        const auto rows = dc_stratified_eval(ensemble, &forecast, args.delta, args.t_lo,
                                             t_hi, bins, metrics, args.tau, args.ece_bins,
                                             args.resamples, ensemble.master_seed);
        write_metric_report_csv(report, rows);
    }
    manifest.add_output(report);
    manifest.write(dir / "manifest.json");
    return 0;
}

struct ExperimentArgs {
    std::string kind;
    std::string config_path;
    std::string out_dir;
    int sims = -1;
    int workers = 1;
    bool force = false;
};

ExperimentConfig load_experiment_config(const fs::path& path) {
    nlohmann::json j = parse_json_file(path);
    if (!j.is_object()) throw ConfigError(path.string() + ": expected a JSON object");
    nlohmann::json exp = nlohmann::json::object();
    if (j.contains("experiment")) {
        exp = j.at("experiment");
        if (!exp.is_object()) {
            throw ConfigError(path.string() + ": \"experiment\" must be an object");
        }
        j.erase("experiment");
    }
    ExperimentConfig cfg;
    if (j.contains("config")) {
        cfg.base = ensemble_spec_from_json(j);
    } else {
        cfg.base.config = sim_config_from_json(j);
    }

    static const std::vector<std::string> keys = {
        "s_levels",  "sweep_levels",  "train_ratio", "t0",
        "t_end",     "tau",           "ece_bins",    "variance_bins",
        "dc_delta",  "dc_bins",       "n_resamples", "mismatch_level",
        "metrics"};
    for (const auto& [key, value] : exp.items()) {
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ConfigError(path.string() + ": unknown experiment key \"" + key + "\"");
        }
        (void)value;
    }
    auto get = [&](const char* key, auto& field) {
        if (exp.contains(key)) {
            try {
                exp.at(key).get_to(field);
            } catch (const nlohmann::json::exception&) {
                throw ConfigError(path.string() + ": bad type for experiment key \"" +
                                  key + "\"");
            }
        }
    };
    get("s_levels", cfg.s_levels);
    get("sweep_levels", cfg.sweep_levels);
    get("train_ratio", cfg.train_ratio);
    get("t0", cfg.t0);
    get("t_end", cfg.t_end);
    get("tau", cfg.tau);
    get("ece_bins", cfg.ece_bins);
    get("variance_bins", cfg.variance_bins);
    get("dc_delta", cfg.dc_delta);
    get("dc_bins", cfg.dc_bins);
    get("n_resamples", cfg.n_resamples);
    get("mismatch_level", cfg.mismatch_level);
    get("metrics", cfg.metrics);
    return cfg;
}

int cmd_experiment(const ExperimentArgs& args) {
    ExperimentConfig cfg = load_experiment_config(args.config_path);
    if (args.sims >= 0) cfg.base.n_sims = args.sims;
    cfg.workers = args.workers;
    run_experiment(args.kind, cfg, args.out_dir, args.force);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic forest-fire CA: simulation, ensemble statistics, and "
                 "forecast verification"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "Run Monte-Carlo simulations to .ffca traces");
    sim->add_option("config", sim_args.config_path, "JSON config (SimConfig or spec)")
        ->required()
        ->check(CLI::ExistingFile);
    sim->add_option("--out", sim_args.out_dir, "Output directory")->required();
    sim->add_option("--sims", sim_args.sims, "Number of simulations (overrides config)");
    sim->add_option("--s-level", sim_args.s_level, "S-Level override, percent in [0,100]");
    auto* seed_opt = sim->add_option("--seed", sim_args.seed, "Master seed override");
    sim->add_option("--workers", sim_args.workers, "Worker threads")->check(CLI::PositiveNumber);
    sim->add_flag("--force", sim_args.force, "Overwrite existing outputs");

    StatsArgs stats_args;
    auto* stats = app.add_subcommand("stats", "Ensemble statistics from a trace directory");
    stats->add_option("trace_dir", stats_args.trace_dir, "Directory of .ffca traces")
        ->required()
        ->check(CLI::ExistingDirectory);
    stats->add_option("--out", stats_args.out_dir, "Output directory")->required();
    stats->add_flag("--force", stats_args.force, "Overwrite existing outputs");

    EvaluateArgs eval_args;
    auto* eval = app.add_subcommand("evaluate", "Score a forecast against traces");
    eval->add_option("forecast", eval_args.forecast_path, "Forecast .ffst file")
        ->required()
        ->check(CLI::ExistingFile);
    eval->add_option("trace_dir", eval_args.trace_dir, "Directory of .ffca traces")
        ->required()
        ->check(CLI::ExistingDirectory);
    eval->add_option("--out", eval_args.out_dir, "Output directory")->required();
    eval->add_option("--metrics", eval_args.metrics, "Comma-separated metric names")
        ->delimiter(',');
    eval->add_option("--stratify", eval_args.stratify, "time | variance | dc");
    eval->add_option("--tau", eval_args.tau, "Decision threshold for P/R/F1/accuracy");
    eval->add_option("--t-lo", eval_args.t_lo, "First evaluated timestep");
    eval->add_option("--t-hi", eval_args.t_hi, "Last evaluated timestep (default: horizon-1)");
    eval->add_option("--delta", eval_args.delta, "Mask pair offset for dc stratification");
    eval->add_option("--bins", eval_args.bins, "Stratification bin count");
    eval->add_option("--ece-bins", eval_args.ece_bins, "Calibration bin count");
    eval->add_option("--resamples", eval_args.resamples, "Bootstrap resamples for dc CIs");
    eval->add_flag("--force", eval_args.force, "Overwrite existing outputs");

    ExperimentArgs exp_args;
    auto* exp = app.add_subcommand("experiment", "Run a full study end to end");
    exp->add_option("kind", exp_args.kind,
                    "sweep | time_stratified | variance_sensitivity | calibration | "
                    "dc_table | cross_slevel")
        ->required();
    exp->add_option("config", exp_args.config_path, "JSON config")
        ->required()
        ->check(CLI::ExistingFile);
    exp->add_option("--out", exp_args.out_dir, "Output directory")->required();
    exp->add_option("--sims", exp_args.sims, "Simulations per ensemble (overrides config)");
    exp->add_option("--workers", exp_args.workers, "Worker threads")->check(CLI::PositiveNumber);
    exp->add_flag("--force", exp_args.force, "Overwrite existing outputs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    sim_args.seed_set = seed_opt->count() > 0;

    try {
        if (app.got_subcommand(sim)) return cmd_simulate(sim_args);
        if (app.got_subcommand(stats)) return cmd_stats(stats_args);
        if (app.got_subcommand(eval)) return cmd_evaluate(eval_args);
        return cmd_experiment(exp_args);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const SeedingError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ContaminationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
}
