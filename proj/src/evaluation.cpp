#include "antcensus/evaluation.hpp"

#include "antcensus/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace antcensus {

MatchReport match(const std::vector<PixelBox>& preds, const std::vector<PixelBox>& gts,
                  const EvalConfig& cfg) {
    if (!(cfg.iou_threshold > 0.0 && cfg.iou_threshold <= 1.0)) {
        throw std::invalid_argument("iou_threshold must be in (0, 1]");
    }
    if (!(cfg.confidence_threshold >= 0.0 && cfg.confidence_threshold <= 1.0)) {
        throw std::invalid_argument("confidence_threshold must be in [0, 1]");
    }

    std::vector<std::size_t> order;
    order.reserve(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i].confidence >= cfg.confidence_threshold) order.push_back(i);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (preds[a].confidence != preds[b].confidence) return preds[a].confidence > preds[b].confidence;
        if (preds[a].cx != preds[b].cx) return preds[a].cx < preds[b].cx;
        if (preds[a].cy != preds[b].cy) return preds[a].cy < preds[b].cy;
        return a < b;
    });

    MatchReport report;
    std::vector<bool> gt_taken(gts.size(), false);
    for (std::size_t pi : order) {
        std::size_t best_gt = gts.size();
        double best_iou = 0.0;
        for (std::size_t gi = 0; gi < gts.size(); ++gi) {
            if (gt_taken[gi]) continue;
            const double v = iou(preds[pi], gts[gi]);
            if (v > best_iou) {
                best_iou = v;
                best_gt = gi;
            }
        }
        if (best_gt < gts.size() && best_iou >= cfg.iou_threshold) {
            gt_taken[best_gt] = true;
            report.pairs.push_back({pi, best_gt, best_iou});
        } else {
            ++report.fp;
        }
    }

    report.tp = report.pairs.size();
    report.fn = gts.size() - report.tp;
    if (report.tp + report.fp == 0) {
        report.precision = 1.0;
        report.precision_vacuous = true;
    } else {
        report.precision = static_cast<double>(report.tp) / static_cast<double>(report.tp + report.fp);
    }
    if (report.tp + report.fn == 0) {
        report.recall = 1.0;
        report.recall_vacuous = true;
    } else {
        report.recall = static_cast<double>(report.tp) / static_cast<double>(report.tp + report.fn);
    }
    return report;
}

AgreementReport count_agreement(const std::vector<double>& manual_counts,
                                const std::vector<double>& auto_counts) {
    if (manual_counts.size() != auto_counts.size()) {
        throw std::invalid_argument("count vectors differ in length");
    }
    const std::size_t n = manual_counts.size();
    if (n < 2) throw std::invalid_argument("need at least two paired counts");

    const double nn = static_cast<double>(n);
    const double mean_m = std::accumulate(manual_counts.begin(), manual_counts.end(), 0.0) / nn;
    const double mean_a = std::accumulate(auto_counts.begin(), auto_counts.end(), 0.0) / nn;

    double cov = 0.0, var_m = 0.0, var_a = 0.0, sq_diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dm = manual_counts[i] - mean_m;
        const double da = auto_counts[i] - mean_a;
        cov += dm * da;
        var_m += dm * dm;
        var_a += da * da;
        const double diff = auto_counts[i] - manual_counts[i];
        sq_diff += diff * diff;
    }

    AgreementReport report;
    report.n = n;
    report.rmse = std::sqrt(sq_diff / nn);
    if (var_m > 0.0 && var_a > 0.0) {
        const double r = cov / std::sqrt(var_m * var_a); // the (n-1) factors cancel
        report.r_squared = std::min(r * r, 1.0);
    }
    return report;
}

std::vector<std::vector<std::size_t>> bootstrap_subsets(std::size_t pool_size, std::size_t n,
                                                        std::size_t replicates, std::uint64_t seed) {
    if (pool_size < 1) throw std::invalid_argument("pool_size must be >= 1");
    if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");

    std::vector<std::vector<std::size_t>> plans;
    plans.reserve(replicates);
    for (std::size_t rep = 0; rep < replicates; ++rep) {
        std::mt19937_64 rng(mix_seed(seed, rep));
        std::vector<std::size_t> draw;
        draw.reserve(n);
        if (n <= pool_size) {
            // partial Fisher-Yates: the first n slots become the sample
            std::vector<std::size_t> pool(pool_size);
            std::iota(pool.begin(), pool.end(), std::size_t{0});
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(bounded(rng, pool_size - i));
                std::swap(pool[i], pool[j]);
                draw.push_back(pool[i]);
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                draw.push_back(static_cast<std::size_t>(bounded(rng, pool_size)));
            }
        }
        plans.push_back(std::move(draw));
    }
    return plans;
}

RunSummary summarize_runs(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("summarize_runs: empty input");
    RunSummary summary;
    summary.n_runs = values.size();
    summary.mean = std::accumulate(values.begin(), values.end(), 0.0) /
                   static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) {
            const double d = v - summary.mean;
            ss += d * d;
        }
        summary.half_width = 1.96 * std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return summary;
}

} // namespace antcensus
