#pragma once

#include "antcensus/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace antcensus {

struct EvalConfig {
    double iou_threshold = 0.6;
    double confidence_threshold = 0.25;
};

struct MatchPair {
    std::size_t pred_index = 0; // index into the original preds vector
    std::size_t gt_index = 0;   // index into the gts vector
    double iou = 0.0;
};

struct MatchReport {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::vector<MatchPair> pairs;
    double precision = 1.0;
    double recall = 1.0;
    // True when the respective denominator was zero, so the reported 1.0 is a
    // convention rather than a measurement (empty-set rule for zero-ant images).
    bool precision_vacuous = false;
    bool recall_vacuous = false;
};

/// Scores predictions against ground truth. Predictions below the confidence
/// threshold are discarded; the rest are processed confidence-descending
/// (ties by cx, then cy) and each one matches the unmatched ground-truth box
/// of maximal IoU when that IoU reaches the threshold. Unmatched survivors
/// are false positives, unmatched ground truths false negatives.
MatchReport match(const std::vector<PixelBox>& preds, const std::vector<PixelBox>& gts,
                  const EvalConfig& cfg = {});

struct AgreementReport {
    std::optional<double> r_squared; // absent when either count vector has zero variance
    double rmse = 0.0;
    std::size_t n = 0;
};

/// Squared Pearson correlation and root-mean-square difference between two
/// aligned count vectors. Throws std::invalid_argument on length mismatch or
/// fewer than two entries.
AgreementReport count_agreement(const std::vector<double>& manual_counts,
                                const std::vector<double>& auto_counts);

/// Index plans for repeated subset sampling. Each replicate draws from its
/// own stream seeded by (seed, replicate index): n <= pool_size samples
/// without replacement, n > pool_size samples with replacement to length n.
std::vector<std::vector<std::size_t>> bootstrap_subsets(std::size_t pool_size, std::size_t n,
                                                        std::size_t replicates, std::uint64_t seed);

struct RunSummary {
    double mean = 0.0;
    double half_width = 0.0; // 1.96 x sample standard deviation
    std::size_t n_runs = 0;
};

/// Mean and 1.96 x sample (n-1) standard deviation; half_width is 0 for a
/// single run. Throws std::invalid_argument on empty input.
RunSummary summarize_runs(const std::vector<double>& values);

} // namespace antcensus
