#pragma once

#include "antcensus/annotation_io.hpp"
#include "antcensus/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace antcensus {

/// What a backend gets handed per detection call: an identifier, the pixel
/// frame the returned boxes must live in, and (when one exists on disk) the
/// image file itself.
struct ImageRef {
    std::string image_id;
    ImageSize size;
    std::optional<std::filesystem::path> image_path;
};

/// Uniform detection-source contract. Implementations must be deterministic
/// for a fixed configuration and input, and safe to invoke concurrently on
/// distinct images.
class DetectorBackend {
public:
    virtual ~DetectorBackend() = default;
    virtual std::vector<PixelBox> detect(const ImageRef& ref) = 0;
};

/// Runs backend.detect and enforces the contract on its output: boxes inside
/// the frame, confidences in [0,1]. Violations raise BackendError — backend
/// output is checked at this boundary, not trusted.
std::vector<PixelBox> checked_detect(DetectorBackend& backend, const ImageRef& ref);

/// Replays detections stored as label/detection files: records are
/// denormalized into the ref's frame in file order; plain labels come back
/// with confidence 1.0. An indexed entry without a label file yields an empty
/// list; an unknown image_id is an error.
class ReplayBackend : public DetectorBackend {
public:
    explicit ReplayBackend(DatasetIndex store) : store_(std::move(store)) {}
    std::vector<PixelBox> detect(const ImageRef& ref) override;

private:
    DatasetIndex store_;
};

/// Convenience wrapper: replay image_id using the size recorded in the store.
std::vector<PixelBox> detect_replay(const DatasetIndex& store, const std::string& image_id);

/// Seeded corruption of ground truth, for analytic precision/recall targets.
struct SyntheticNoiseConfig {
    double fn_rate = 0.0;      // fraction of ground-truth boxes to drop
    double fp_rate = 0.0;      // false boxes added per ground-truth box
    double center_jitter = 0.0; // max center displacement, pixels, per axis
    double size_jitter = 0.0;   // max relative size change
    std::uint64_t seed = 0;
};

/// Drops exactly round(fn_rate*N) boxes (seeded uniform choice), jitters the
/// survivors, and appends round(fp_rate*N) uniformly placed false boxes whose
/// sizes are drawn from the ground-truth size distribution. Survivors get
/// confidence in [0.5, 1.0), false boxes in [0.3, 0.9). Survivors keep their
/// input order; false boxes follow. Deterministic under a fixed seed.
std::vector<PixelBox> detect_synthetic(const std::vector<PixelBox>& gt, ImageSize size,
                                       const SyntheticNoiseConfig& cfg);

/// Backend form of detect_synthetic over a ground-truth label store. Each
/// image gets an independent stream derived from (cfg.seed, image_id).
class SyntheticBackend : public DetectorBackend {
public:
    SyntheticBackend(DatasetIndex gt_store, SyntheticNoiseConfig cfg)
        : gt_(std::move(gt_store)), cfg_(cfg) {}
    std::vector<PixelBox> detect(const ImageRef& ref) override;

private:
    DatasetIndex gt_;
    SyntheticNoiseConfig cfg_;
};

/// External model runtime behind a file-based subprocess boundary: the
/// command is invoked as `<command> --input <image> --output <detections>`
/// and must write the detection text format and exit 0.
struct ExternalAdapterConfig {
    std::string command;
    double timeout_secs = 120.0;

    /// Applies the ANTCENSUS_EXTERNAL_TIMEOUT_SECS override when set.
    static ExternalAdapterConfig from_env(std::string command);
};

/// One-shot call to the external runtime. Throws BackendError on launch
/// failure, nonzero exit (with captured diagnostics), timeout, or malformed
/// output. An empty or missing output file is an empty detection list.
std::vector<PixelBox> detect_external(const ImageRef& ref, const ExternalAdapterConfig& cfg);

class ExternalBackend : public DetectorBackend {
public:
    explicit ExternalBackend(ExternalAdapterConfig cfg) : cfg_(std::move(cfg)) {}
    std::vector<PixelBox> detect(const ImageRef& ref) override;

private:
    ExternalAdapterConfig cfg_;
    std::mutex serialize_; // one runtime process at a time
};

struct GridSpec {
    int cols = 1;
    int rows = 1;
    double overlap_fraction = 0.0;
};

/// The sliced pipeline: plan the grid, run the backend per tile (tiles are
/// addressed as `<image_id>__r<row>c<col>` with the tile's own frame), remap
/// tile detections to image coordinates, and merge duplicates. A 1x1 grid
/// passes the original ref through unchanged. Backend failures are rethrown
/// naming the failing tile. Output is sorted by confidence descending.
std::vector<PixelBox> sliced_detect(const ImageRef& ref, const GridSpec& grid,
                                    DetectorBackend& backend, double merge_iou = 0.5);

} // namespace antcensus
