#pragma once

// Test-side fixtures and independent oracles. The oracles deliberately take
// their own computational routes (corner arrays, augmenting paths, two-pass
// statistics, full-grid sweeps) so they stay independent of the library code
// they check.

#include "antcensus/geometry.hpp"
#include "antcensus/heatmap.hpp"
#include "antcensus/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

namespace testutil {

using namespace antcensus;

/// Unique temporary directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("antcensus_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline PixelBox random_box(std::mt19937_64& rng, ImageSize frame, double min_side = 4.0,
                           double max_side = 30.0) {
    PixelBox box;
    box.w = uniform_in(rng, min_side, max_side);
    box.h = uniform_in(rng, min_side, max_side);
    box.cx = uniform_in(rng, box.w / 2, frame.width - box.w / 2);
    box.cy = uniform_in(rng, box.h / 2, frame.height - box.h / 2);
    box.confidence = uniform_in(rng, 0.0, 1.0);
    return box;
}

/// Boxes on a jittered lattice: pairwise disjoint, strictly inside the frame.
inline std::vector<PixelBox> lattice_boxes(std::mt19937_64& rng, ImageSize frame, int per_row,
                                           int per_col, double side = 10.0) {
    std::vector<PixelBox> boxes;
    const double step_x = static_cast<double>(frame.width) / per_row;
    const double step_y = static_cast<double>(frame.height) / per_col;
    for (int iy = 0; iy < per_col; ++iy) {
        for (int ix = 0; ix < per_row; ++ix) {
            PixelBox box;
            box.w = side;
            box.h = side;
            const double jitter = std::min(step_x, step_y) / 2 - side / 2 - 1.0;
            box.cx = (ix + 0.5) * step_x + uniform_in(rng, -jitter, jitter);
            box.cy = (iy + 0.5) * step_y + uniform_in(rng, -jitter, jitter);
            box.confidence = uniform_in(rng, 0.3, 1.0);
            boxes.push_back(box);
        }
    }
    return boxes;
}

// --- IoU via corner arrays (independent route) ------------------------------

inline double iou_oracle(const PixelBox& a, const PixelBox& b) {
    const double ax[2] = {a.cx - a.w / 2, a.cx + a.w / 2};
    const double ay[2] = {a.cy - a.h / 2, a.cy + a.h / 2};
    const double bx[2] = {b.cx - b.w / 2, b.cx + b.w / 2};
    const double by[2] = {b.cy - b.h / 2, b.cy + b.h / 2};
    const double ix = std::max(0.0, std::min(ax[1], bx[1]) - std::max(ax[0], bx[0]));
    const double iy = std::max(0.0, std::min(ay[1], by[1]) - std::max(ay[0], by[0]));
    const double inter = ix * iy;
    const double area_a = (ax[1] - ax[0]) * (ay[1] - ay[0]);
    const double area_b = (bx[1] - bx[0]) * (by[1] - by[0]);
    const double uni = area_a + area_b - inter;
    return uni > 0 ? inter / uni : 0.0;
}

// --- Quadratic NMS oracle ----------------------------------------------------

/// Greedy suppression re-stated naively: visit candidates in the documented
/// order and re-check every kept box from scratch each time.
inline std::vector<PixelBox> nms_oracle(std::vector<PixelBox> dets, double thr) {
    std::stable_sort(dets.begin(), dets.end(), [](const PixelBox& a, const PixelBox& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.cx != b.cx) return a.cx < b.cx;
        return a.cy < b.cy;
    });
    std::vector<PixelBox> kept;
    for (const auto& cand : dets) {
        bool ok = true;
        for (const auto& k : kept) {
            if (iou_oracle(cand, k) >= thr) ok = false;
        }
        if (ok) kept.push_back(cand);
    }
    return kept;
}

// --- Maximum bipartite matching oracle (Kuhn's augmenting paths) -------------

/// Maximum number of pred-gt pairs with IoU >= thr, over preds at or above
/// the confidence threshold. Upper bound for any greedy assignment.
inline std::size_t max_matching_oracle(const std::vector<PixelBox>& preds,
                                       const std::vector<PixelBox>& gts, double iou_thr,
                                       double conf_thr) {
    std::vector<std::vector<std::size_t>> adj;
    for (const auto& p : preds) {
        if (p.confidence < conf_thr) continue;
        std::vector<std::size_t> edges;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (iou_oracle(p, gts[g]) >= iou_thr) edges.push_back(g);
        }
        adj.push_back(std::move(edges));
    }

    std::vector<std::size_t> gt_owner(gts.size(), static_cast<std::size_t>(-1));
    std::vector<bool> visited;

    std::function<bool(std::size_t)> augment = [&](std::size_t p) -> bool {
        for (std::size_t g : adj[p]) {
            if (visited[g]) continue;
            visited[g] = true;
            if (gt_owner[g] == static_cast<std::size_t>(-1) || augment(gt_owner[g])) {
                gt_owner[g] = p;
                return true;
            }
        }
        return false;
    };

    std::size_t matched = 0;
    for (std::size_t p = 0; p < adj.size(); ++p) {
        visited.assign(gts.size(), false);
        if (augment(p)) ++matched;
    }
    return matched;
}

/// True when no ground-truth box is reachable (IoU >= thr) from two different
/// eligible predictions and no prediction reaches two ground truths: on such
/// instances greedy assignment must equal the maximum matching.
inline bool conflict_free(const std::vector<PixelBox>& preds, const std::vector<PixelBox>& gts,
                          double iou_thr, double conf_thr) {
    std::vector<int> gt_degree(gts.size(), 0);
    for (const auto& p : preds) {
        if (p.confidence < conf_thr) continue;
        int pred_degree = 0;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (iou_oracle(p, gts[g]) >= iou_thr) {
                ++pred_degree;
                ++gt_degree[g];
            }
        }
        if (pred_degree > 1) return false;
    }
    return std::all_of(gt_degree.begin(), gt_degree.end(), [](int d) { return d <= 1; });
}

// --- Two-pass agreement statistics oracle ------------------------------------

struct AgreementOracle {
    bool r2_defined = false;
    double r2 = 0.0;
    double rmse = 0.0;
};

inline AgreementOracle agreement_oracle(const std::vector<double>& y,
                                        const std::vector<double>& yhat) {
    const std::size_t n = y.size();
    double mean_y = 0.0, mean_yhat = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_y += y[i] / static_cast<double>(n);
        mean_yhat += yhat[i] / static_cast<double>(n);
    }
    double cov = 0.0, sd_y = 0.0, sd_yhat = 0.0, se = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (yhat[i] - mean_yhat) * (y[i] - mean_y) / static_cast<double>(n - 1);
        sd_y += (y[i] - mean_y) * (y[i] - mean_y) / static_cast<double>(n - 1);
        sd_yhat += (yhat[i] - mean_yhat) * (yhat[i] - mean_yhat) / static_cast<double>(n - 1);
        se += (yhat[i] - y[i]) * (yhat[i] - y[i]);
    }
    sd_y = std::sqrt(sd_y);
    sd_yhat = std::sqrt(sd_yhat);

    AgreementOracle oracle;
    oracle.rmse = std::sqrt(se / static_cast<double>(n));
    if (sd_y > 0.0 && sd_yhat > 0.0) {
        oracle.r2_defined = true;
        const double r = cov / (sd_y * sd_yhat);
        oracle.r2 = r * r;
    }
    return oracle;
}

// --- Exhaustive heatmap accumulation ------------------------------------------

/// Full-grid sweep with no truncation; the library's truncated kernel must
/// stay within truncation_epsilon of this per cell.
inline HeatGrid exhaustive_accumulate(int grid_w, int grid_h, const std::vector<PixelBox>& dets,
                                      ImageSize frame, KernelVariant variant,
                                      RadiusMode radius_mode = RadiusMode::mean_extent) {
    HeatGrid grid = make_grid(grid_w, grid_h, frame);
    const double sx = static_cast<double>(grid_w) / frame.width;
    const double sy = static_cast<double>(grid_h) / frame.height;
    for (const auto& det : dets) {
        const Circle c = box_to_circle(det, radius_mode);
        const double x0 = c.x0 * sx;
        const double y0 = c.y0 * sy;
        const double r = c.r * (sx + sy) / 2.0;
        for (int y = 0; y < grid_h; ++y) {
            for (int x = 0; x < grid_w; ++x) {
                const double d = std::sqrt((x - x0) * (x - x0) + (y - y0) * (y - y0));
                const double value = variant == KernelVariant::standard
                                         ? std::exp(-(d * d) / (2.0 * r * r))
                                         : std::exp(-d / (2.0 * r * r));
                grid.at(x, y) += value;
            }
        }
    }
    return grid;
}

} // namespace testutil
