#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace stochfire {

// Binary grids are flattened row-major 0/1 bytes; forecasts are flattened
// probabilities in [0,1]. Metrics whose denominator can vanish return
// std::nullopt instead of a placeholder value, and callers record support.

struct ConfusionCounts {
    long long tp = 0, fp = 0, fn = 0, tn = 0;
    long long total() const { return tp + fp + fn + tn; }
};

std::vector<std::uint8_t> apply_threshold(const std::vector<double>& forecast, double tau);

ConfusionCounts confusion(const std::vector<std::uint8_t>& pred,
                          const std::vector<std::uint8_t>& gt);
std::optional<double> precision(const ConfusionCounts& c);
std::optional<double> recall(const ConfusionCounts& c);
std::optional<double> accuracy(const ConfusionCounts& c);
std::optional<double> f1(const ConfusionCounts& c);

// Pooled score summaries: every cell (or pooled cell/realization pair) with
// the same forecast value collapses into one group. The ranking metrics work
// on groups so pooled evaluation stays O(distinct scores).
struct ScoreGroup {
    double score = 0.0;
    long long pos = 0;  // positives with this score
    long long tot = 0;  // cells with this score
};

std::vector<ScoreGroup> group_scores(const std::vector<double>& forecast,
                                     const std::vector<std::uint8_t>& gt);

struct PrCurve {
    std::vector<double> threshold;
    std::vector<double> precision;
    std::vector<double> recall;
};
struct RocCurve {
    std::vector<double> threshold;
    std::vector<double> fpr;
    std::vector<double> tpr;
};

// Average precision: sum of (R_k - R_{k-1}) * P_k over distinct thresholds
// in descending score order. Undefined without positives.
std::optional<double> auc_pr_grouped(std::vector<ScoreGroup> groups);
std::optional<double> auc_pr(const std::vector<double>& forecast,
                             const std::vector<std::uint8_t>& gt);
PrCurve pr_curve(const std::vector<double>& forecast, const std::vector<std::uint8_t>& gt);

// Trapezoidal TPR-vs-FPR area; equals the tie-corrected Mann-Whitney rank
// statistic. Undefined unless both classes are present.
std::optional<double> auc_roc_grouped(std::vector<ScoreGroup> groups);
std::optional<double> auc_roc(const std::vector<double>& forecast,
                              const std::vector<std::uint8_t>& gt);
RocCurve roc_curve(const std::vector<double>& forecast, const std::vector<std::uint8_t>& gt);

double mse(const std::vector<double>& forecast, const std::vector<std::uint8_t>& outcome);

struct BrierDecomposition {
    double reliability = 0.0;
    double conditional_variance = 0.0;
};
// Groups cells by exact forecast value; reliability + conditional_variance
// reproduces mse() to ~1e-15.
BrierDecomposition brier_decomposition(const std::vector<double>& forecast,
                                       const std::vector<std::uint8_t>& outcome);

// Equal-width bins over [0,1], left-closed, last bin closed at 1; acc is the
// per-bin positive rate, conf the per-bin mean forecast.
double ece(const std::vector<double>& forecast, const std::vector<std::uint8_t>& outcome,
           int m = 10);

struct CalibrationCurve {
    std::vector<double> bin_lo;
    std::vector<double> bin_hi;
    std::vector<double> mean_pred;  // NaN for empty bins
    std::vector<double> mean_obs;   // NaN for empty bins
    std::vector<long long> count;
};
CalibrationCurve calibration_curve(const std::vector<double>& forecast,
                                   const std::vector<std::uint8_t>& outcome, int m = 10);

std::optional<double> dice(const std::vector<std::uint8_t>& a,
                           const std::vector<std::uint8_t>& b);

// Percentile bootstrap CI for the mean of the samples; quantiles use linear
// interpolation. Fewer than 2 samples yields nullopt (reported as NA).
std::optional<std::pair<double, double>> bootstrap_ci(const std::vector<double>& samples,
                                                      int n_resamples, double level,
                                                      std::uint64_t seed);

// Type-7 (linear interpolation) quantile of unsorted data, q in [0,1].
double quantile(std::vector<double> xs, double q);

// Pooled variants: cell i carries forecast score[i] and was scored against
// tot[i] realizations, pos[i] of which were positive. Equivalent to the flat
// forms on the expanded per-realization arrays, without materializing them.
ConfusionCounts pooled_confusion(const std::vector<double>& score,
                                 const std::vector<long long>& pos,
                                 const std::vector<long long>& tot, double tau);
double pooled_mse(const std::vector<double>& score, const std::vector<long long>& pos,
                  const std::vector<long long>& tot);
BrierDecomposition pooled_brier_decomposition(const std::vector<double>& score,
                                              const std::vector<long long>& pos,
                                              const std::vector<long long>& tot);
CalibrationCurve pooled_calibration_curve(const std::vector<double>& score,
                                          const std::vector<long long>& pos,
                                          const std::vector<long long>& tot, int m = 10);
double pooled_ece(const std::vector<double>& score, const std::vector<long long>& pos,
                  const std::vector<long long>& tot, int m = 10);

// Spearman rank correlation with average ranks on ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// One row of a stratified metric report.
struct MetricReportRow {
    std::string stratum_kind;  // timestep | variance | dc | overall
    double stratum_lo = 0.0;
    double stratum_hi = 0.0;
    std::string metric;
    std::optional<double> value;
    long long support = 0;
    std::optional<double> ci_lo;
    std::optional<double> ci_hi;
};

}  // namespace stochfire
