#include "stochfire/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stochfire/errors.hpp"
#include "stochfire/rng.hpp"

namespace stochfire {

namespace {

// Neumaier compensated summation; keeps identities like the Brier
// decomposition tight even over 10^6-cell pools.
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    double value() const { return sum + comp; }
};

void check_shapes(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw InputError(std::string(what) + ": size mismatch");
    if (a == 0) throw InputError(std::string(what) + ": empty input");
}

int bin_index(double f, int m) {
    int b = static_cast<int>(f * m);
    return std::clamp(b, 0, m - 1);
}

}  // namespace

std::vector<std::uint8_t> apply_threshold(const std::vector<double>& forecast, double tau) {
    if (tau < 0.0 || tau > 1.0) throw InputError("threshold must lie in [0, 1]");
    std::vector<std::uint8_t> out(forecast.size());
    for (std::size_t i = 0; i < forecast.size(); ++i) out[i] = forecast[i] > tau ? 1 : 0;
    return out;
}

ConfusionCounts confusion(const std::vector<std::uint8_t>& pred,
                          const std::vector<std::uint8_t>& gt) {
    check_shapes(pred.size(), gt.size(), "confusion");
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i]) {
            if (gt[i]) ++c.tp; else ++c.fp;
        } else {
            if (gt[i]) ++c.fn; else ++c.tn;
        }
    }
    return c;
}

std::optional<double> precision(const ConfusionCounts& c) {
    const long long d = c.tp + c.fp;
    if (d == 0) return std::nullopt;
    return static_cast<double>(c.tp) / d;
}

std::optional<double> recall(const ConfusionCounts& c) {
    const long long d = c.tp + c.fn;
    if (d == 0) return std::nullopt;
    return static_cast<double>(c.tp) / d;
}

std::optional<double> accuracy(const ConfusionCounts& c) {
    const long long d = c.total();
    if (d == 0) return std::nullopt;
    return static_cast<double>(c.tp + c.tn) / d;
}

std::optional<double> f1(const ConfusionCounts& c) {
    const auto p = precision(c);
    const auto r = recall(c);
    if (!p || !r || *p + *r == 0.0) return std::nullopt;
    return 2.0 * *p * *r / (*p + *r);
}

std::vector<ScoreGroup> group_scores(const std::vector<double>& forecast,
                                     const std::vector<std::uint8_t>& gt) {
    check_shapes(forecast.size(), gt.size(), "ranking metric");
    std::vector<std::size_t> order(forecast.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return forecast[a] > forecast[b];
    });
    std::vector<ScoreGroup> groups;
    for (std::size_t i : order) {
        if (groups.empty() || groups.back().score != forecast[i]) {
            groups.push_back({forecast[i], 0, 0});
        }
        groups.back().pos += gt[i] ? 1 : 0;
        groups.back().tot += 1;
    }
    return groups;
}

namespace {

// Sorts descending by score and merges equal scores, so callers may pass
// unmerged pooled groups.
void normalize_groups(std::vector<ScoreGroup>& groups) {
    std::sort(groups.begin(), groups.end(),
              [](const ScoreGroup& a, const ScoreGroup& b) { return a.score > b.score; });
    std::size_t w = 0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (w > 0 && groups[w - 1].score == groups[i].score) {
            groups[w - 1].pos += groups[i].pos;
            groups[w - 1].tot += groups[i].tot;
        } else {
            groups[w++] = groups[i];
        }
    }
    groups.resize(w);
}

}  // namespace

std::optional<double> auc_pr_grouped(std::vector<ScoreGroup> groups) {
    normalize_groups(groups);
    long long total_pos = 0;
    for (const auto& g : groups) total_pos += g.pos;
    if (total_pos == 0) return std::nullopt;

    double ap = 0.0;
    double prev_recall = 0.0;
    long long tp = 0, seen = 0;
    for (const auto& g : groups) {
        tp += g.pos;
        seen += g.tot;
        const double rec = static_cast<double>(tp) / total_pos;
        const double prec = static_cast<double>(tp) / seen;
        ap += (rec - prev_recall) * prec;
        prev_recall = rec;
    }
    return ap;
}

std::optional<double> auc_pr(const std::vector<double>& forecast,
                             const std::vector<std::uint8_t>& gt) {
    return auc_pr_grouped(group_scores(forecast, gt));
}

PrCurve pr_curve(const std::vector<double>& forecast, const std::vector<std::uint8_t>& gt) {
    auto groups = group_scores(forecast, gt);
    long long total_pos = 0;
    for (const auto& g : groups) total_pos += g.pos;
    if (total_pos == 0) throw InputError("PR curve needs at least one positive");
    PrCurve curve;
    long long tp = 0, seen = 0;
    for (const auto& g : groups) {
        tp += g.pos;
        seen += g.tot;
        curve.threshold.push_back(g.score);
        curve.precision.push_back(static_cast<double>(tp) / seen);
        curve.recall.push_back(static_cast<double>(tp) / total_pos);
    }
    return curve;
}

std::optional<double> auc_roc_grouped(std::vector<ScoreGroup> groups) {
    normalize_groups(groups);
    long long total_pos = 0, total = 0;
    for (const auto& g : groups) {
        total_pos += g.pos;
        total += g.tot;
    }
    const long long total_neg = total - total_pos;
    if (total_pos == 0 || total_neg == 0) return std::nullopt;

    double area = 0.0;
    double prev_tpr = 0.0, prev_fpr = 0.0;
    long long tp = 0, fp = 0;
    for (const auto& g : groups) {
        tp += g.pos;
        fp += g.tot - g.pos;
        const double tpr = static_cast<double>(tp) / total_pos;
        const double fpr = static_cast<double>(fp) / total_neg;
        area += (fpr - prev_fpr) * (tpr + prev_tpr) * 0.5;
        prev_tpr = tpr;
        prev_fpr = fpr;
    }
    return area;
}

std::optional<double> auc_roc(const std::vector<double>& forecast,
                              const std::vector<std::uint8_t>& gt) {
    return auc_roc_grouped(group_scores(forecast, gt));
}

RocCurve roc_curve(const std::vector<double>& forecast, const std::vector<std::uint8_t>& gt) {
    auto groups = group_scores(forecast, gt);
    long long total_pos = 0, total = 0;
    for (const auto& g : groups) {
        total_pos += g.pos;
        total += g.tot;
    }
    const long long total_neg = total - total_pos;
    if (total_pos == 0 || total_neg == 0) {
        throw InputError("ROC curve needs both classes present");
    }
    RocCurve curve;
    curve.threshold.push_back(std::numeric_limits<double>::infinity());
    curve.fpr.push_back(0.0);
    curve.tpr.push_back(0.0);
    long long tp = 0, fp = 0;
    for (const auto& g : groups) {
        tp += g.pos;
        fp += g.tot - g.pos;
        curve.threshold.push_back(g.score);
        curve.tpr.push_back(static_cast<double>(tp) / total_pos);
        curve.fpr.push_back(static_cast<double>(fp) / total_neg);
    }
    return curve;
}

double mse(const std::vector<double>& forecast, const std::vector<std::uint8_t>& outcome) {
    check_shapes(forecast.size(), outcome.size(), "mse");
    KahanSum s;
    for (std::size_t i = 0; i < forecast.size(); ++i) {
        const double d = forecast[i] - outcome[i];
        s.add(d * d);
    }
    return s.value() / forecast.size();
}

BrierDecomposition brier_decomposition(const std::vector<double>& forecast,
                                       const std::vector<std::uint8_t>& outcome) {
    check_shapes(forecast.size(), outcome.size(), "brier decomposition");
    std::vector<std::size_t> order(forecast.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return forecast[a] < forecast[b];
    });

    const double n = static_cast<double>(forecast.size());
    KahanSum rel, cvar;
    std::size_t i = 0;
    while (i < order.size()) {
        const double f = forecast[order[i]];
        long long cnt = 0, pos = 0;
        while (i < order.size() && forecast[order[i]] == f) {
            ++cnt;
            pos += outcome[order[i]] ? 1 : 0;
            ++i;
        }
        const double ybar = static_cast<double>(pos) / cnt;
        const double w = cnt / n;
        rel.add(w * (ybar - f) * (ybar - f));
        cvar.add(w * ybar * (1.0 - ybar));
    }
    return {rel.value(), cvar.value()};
}

double ece(const std::vector<double>& forecast, const std::vector<std::uint8_t>& outcome,
           int m) {
    const CalibrationCurve curve = calibration_curve(forecast, outcome, m);
    const double n = static_cast<double>(forecast.size());
    double e = 0.0;
    for (std::size_t k = 0; k < curve.count.size(); ++k) {
        if (curve.count[k] == 0) continue;
        e += (curve.count[k] / n) * std::abs(curve.mean_obs[k] - curve.mean_pred[k]);
    }
    return e;
}

CalibrationCurve calibration_curve(const std::vector<double>& forecast,
                                   const std::vector<std::uint8_t>& outcome, int m) {
    check_shapes(forecast.size(), outcome.size(), "calibration curve");
    if (m < 1) throw InputError("calibration needs at least 1 bin");
    std::vector<KahanSum> pred_sum(m);
    std::vector<long long> pos(m, 0), cnt(m, 0);
    for (std::size_t i = 0; i < forecast.size(); ++i) {
        const double f = forecast[i];
        if (f < 0.0 || f > 1.0) throw InputError("forecast value outside [0, 1]");
        const int b = bin_index(f, m);
        pred_sum[b].add(f);
        pos[b] += outcome[i] ? 1 : 0;
        ++cnt[b];
    }
    CalibrationCurve curve;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int b = 0; b < m; ++b) {
        curve.bin_lo.push_back(static_cast<double>(b) / m);
        curve.bin_hi.push_back(static_cast<double>(b + 1) / m);
        curve.count.push_back(cnt[b]);
        curve.mean_pred.push_back(cnt[b] ? pred_sum[b].value() / cnt[b] : nan);
        curve.mean_obs.push_back(cnt[b] ? static_cast<double>(pos[b]) / cnt[b] : nan);
    }
    return curve;
}

std::optional<double> dice(const std::vector<std::uint8_t>& a,
                           const std::vector<std::uint8_t>& b) {
    check_shapes(a.size(), b.size(), "dice");
    long long inter = 0, size_a = 0, size_b = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        size_a += a[i] ? 1 : 0;
        size_b += b[i] ? 1 : 0;
        inter += (a[i] && b[i]) ? 1 : 0;
    }
    if (size_a + size_b == 0) return std::nullopt;
    return 2.0 * inter / (size_a + size_b);
}

double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw InputError("quantile of empty sample");
    if (q < 0.0 || q > 1.0) throw InputError("quantile level must lie in [0, 1]");
    std::sort(xs.begin(), xs.end());
    const double pos = q * (xs.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= xs.size()) return xs.back();
    const double frac = pos - lo;
    return xs[lo] * (1.0 - frac) + xs[lo + 1] * frac;
}

namespace {

void check_pooled(const std::vector<double>& score, const std::vector<long long>& pos,
                  const std::vector<long long>& tot) {
    if (score.size() != pos.size() || score.size() != tot.size()) {
        throw InputError("pooled metric: size mismatch");
    }
    if (score.empty()) throw InputError("pooled metric: empty input");
    for (std::size_t i = 0; i < score.size(); ++i) {
        if (pos[i] < 0 || tot[i] < 1 || pos[i] > tot[i]) {
            throw InputError("pooled metric: inconsistent counts");
        }
    }
}

}  // namespace

ConfusionCounts pooled_confusion(const std::vector<double>& score,
                                 const std::vector<long long>& pos,
                                 const std::vector<long long>& tot, double tau) {
    check_pooled(score, pos, tot);
    if (tau < 0.0 || tau > 1.0) throw InputError("threshold must lie in [0, 1]");
    ConfusionCounts c;
    for (std::size_t i = 0; i < score.size(); ++i) {
        if (score[i] > tau) {
            c.tp += pos[i];
            c.fp += tot[i] - pos[i];
        } else {
            c.fn += pos[i];
            c.tn += tot[i] - pos[i];
        }
    }
    return c;
}

double pooled_mse(const std::vector<double>& score, const std::vector<long long>& pos,
                  const std::vector<long long>& tot) {
    check_pooled(score, pos, tot);
    KahanSum s;
    long long n = 0;
    for (std::size_t i = 0; i < score.size(); ++i) {
        const double f = score[i];
        s.add(pos[i] * (1.0 - f) * (1.0 - f));
        s.add((tot[i] - pos[i]) * f * f);
        n += tot[i];
    }
    return s.value() / n;
}

BrierDecomposition pooled_brier_decomposition(const std::vector<double>& score,
                                              const std::vector<long long>& pos,
                                              const std::vector<long long>& tot) {
    check_pooled(score, pos, tot);
    std::vector<std::size_t> order(score.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
    long long n = 0;
    for (long long t : tot) n += t;

    KahanSum rel, cvar;
    std::size_t i = 0;
    while (i < order.size()) {
        const double f = score[order[i]];
        long long cnt = 0, p = 0;
        while (i < order.size() && score[order[i]] == f) {
            cnt += tot[order[i]];
            p += pos[order[i]];
            ++i;
        }
        const double ybar = static_cast<double>(p) / cnt;
        const double w = static_cast<double>(cnt) / n;
        rel.add(w * (ybar - f) * (ybar - f));
        cvar.add(w * ybar * (1.0 - ybar));
    }
    return {rel.value(), cvar.value()};
}

CalibrationCurve pooled_calibration_curve(const std::vector<double>& score,
                                          const std::vector<long long>& pos,
                                          const std::vector<long long>& tot, int m) {
    check_pooled(score, pos, tot);
    if (m < 1) throw InputError("calibration needs at least 1 bin");
    std::vector<KahanSum> pred_sum(m);
    std::vector<long long> bin_pos(m, 0), cnt(m, 0);
    for (std::size_t i = 0; i < score.size(); ++i) {
        const double f = score[i];
        if (f < 0.0 || f > 1.0) throw InputError("forecast value outside [0, 1]");
        const int b = bin_index(f, m);
        pred_sum[b].add(f * tot[i]);
        bin_pos[b] += pos[i];
        cnt[b] += tot[i];
    }
    CalibrationCurve curve;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int b = 0; b < m; ++b) {
        curve.bin_lo.push_back(static_cast<double>(b) / m);
        curve.bin_hi.push_back(static_cast<double>(b + 1) / m);
        curve.count.push_back(cnt[b]);
        curve.mean_pred.push_back(cnt[b] ? pred_sum[b].value() / cnt[b] : nan);
        curve.mean_obs.push_back(cnt[b] ? static_cast<double>(bin_pos[b]) / cnt[b] : nan);
    }
    return curve;
}

double pooled_ece(const std::vector<double>& score, const std::vector<long long>& pos,
                  const std::vector<long long>& tot, int m) {
    const CalibrationCurve curve = pooled_calibration_curve(score, pos, tot, m);
    long long n = 0;
    for (long long t : tot) n += t;
    double e = 0.0;
    for (std::size_t k = 0; k < curve.count.size(); ++k) {
        if (curve.count[k] == 0) continue;
        e += (static_cast<double>(curve.count[k]) / n) *
             std::abs(curve.mean_obs[k] - curve.mean_pred[k]);
    }
    return e;
}

namespace {

std::vector<double> tie_ranks(const std::vector<double>& xs) {
    std::vector<std::size_t> order(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(xs.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && xs[order[j]] == xs[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + (j - 1)) / 2.0 + 1.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
        i = j;
    }
    return ranks;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw InputError("spearman: size mismatch");
    if (x.size() < 2) throw InputError("spearman needs at least 2 pairs");
    const auto rx = tie_ranks(x);
    const auto ry = tie_ranks(y);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= rx.size();
    my /= ry.size();
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double dx = rx[i] - mx;
        const double dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw InputError("spearman: constant input");
    return sxy / std::sqrt(sxx * syy);
}

std::optional<std::pair<double, double>> bootstrap_ci(const std::vector<double>& samples,
                                                      int n_resamples, double level,
                                                      std::uint64_t seed) {
    if (samples.size() < 2) return std::nullopt;
    if (n_resamples < 1) throw InputError("n_resamples must be positive");
    if (level <= 0.0 || level >= 1.0) throw InputError("CI level must lie in (0, 1)");
    SplitMix64 rng(seed);
    std::vector<double> means(n_resamples);
    const std::uint64_t n = samples.size();
    for (int r = 0; r < n_resamples; ++r) {
        KahanSum s;
        for (std::uint64_t i = 0; i < n; ++i) s.add(samples[rng.next_below(n)]);
        means[r] = s.value() / static_cast<double>(n);
    }
    const double a = (1.0 - level) / 2.0;
    return std::make_pair(quantile(means, a), quantile(means, 1.0 - a));
}

}  // namespace stochfire
