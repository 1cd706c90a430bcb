#include "antcensus/detector.hpp"

#include "antcensus/errors.hpp"
#include "antcensus/rng.hpp"
#include "antcensus/tiling.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdlib>
#include <numeric>
#include <thread>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace antcensus {

std::vector<PixelBox> checked_detect(DetectorBackend& backend, const ImageRef& ref) {
    auto dets = backend.detect(ref);
    const double W = ref.size.width;
    const double H = ref.size.height;
    // Tiny slack absorbs the rounding of normalize/denormalize round trips.
    const double ex = 1e-6 * W;
    const double ey = 1e-6 * H;
    for (const auto& d : dets) {
        if (d.w <= 0.0 || d.h <= 0.0 || d.left() < -ex || d.top() < -ey || d.right() > W + ex ||
            d.bottom() > H + ey) {
            throw BackendError("backend returned an out-of-bounds box for image '" + ref.image_id +
                               "': center (" + std::to_string(d.cx) + ", " + std::to_string(d.cy) +
                               "), size " + std::to_string(d.w) + "x" + std::to_string(d.h) +
                               " in frame " + std::to_string(ref.size.width) + "x" +
                               std::to_string(ref.size.height));
        }
        if (d.confidence < 0.0 || d.confidence > 1.0) {
            throw BackendError("backend returned confidence " + std::to_string(d.confidence) +
                               " outside [0,1] for image '" + ref.image_id + "'");
        }
    }
    return dets;
}

namespace {

std::vector<PixelBox> replay_entry(const DatasetEntry& entry, ImageSize size) {
    if (!entry.label_path) return {};
    std::vector<AnnotationRecord> records;
    try {
        records = parse_label_text(read_text_file(*entry.label_path));
    } catch (const ParseError& e) {
        throw DataError(entry.label_path->string() + ": " + e.what());
    }
    std::vector<PixelBox> dets;
    dets.reserve(records.size());
    for (const auto& rec : records) dets.push_back(denormalize(rec, size));
    return dets;
}

} // namespace

std::vector<PixelBox> ReplayBackend::detect(const ImageRef& ref) {
    const DatasetEntry* entry = store_.find(ref.image_id);
    if (!entry) throw BackendError("replay store has no entry for image '" + ref.image_id + "'");
    ImageSize size = ref.size;
    if (!size.valid()) {
        if (!entry->image_size) {
            throw BackendError("no image size known for '" + ref.image_id + "'");
        }
        size = *entry->image_size;
    }
    return replay_entry(*entry, size);
}

std::vector<PixelBox> detect_replay(const DatasetIndex& store, const std::string& image_id) {
    const DatasetEntry* entry = store.find(image_id);
    if (!entry) throw BackendError("replay store has no entry for image '" + image_id + "'");
    if (!entry->image_size) throw BackendError("no image size known for '" + image_id + "'");
    return replay_entry(*entry, *entry->image_size);
}

std::vector<PixelBox> detect_synthetic(const std::vector<PixelBox>& gt, ImageSize size,
                                       const SyntheticNoiseConfig& cfg) {
    if (cfg.fn_rate < 0.0 || cfg.fn_rate > 1.0) throw std::invalid_argument("fn_rate must be in [0,1]");
    if (cfg.fp_rate < 0.0) throw std::invalid_argument("fp_rate must be >= 0");
    if (cfg.center_jitter < 0.0 || cfg.size_jitter < 0.0) {
        throw std::invalid_argument("jitter amounts must be >= 0");
    }
    if (!size.valid()) throw std::invalid_argument("image size must be at least 1x1");

    const std::size_t n = gt.size();
    const auto n_drop = static_cast<std::size_t>(std::lround(cfg.fn_rate * static_cast<double>(n)));
    const auto n_fp = static_cast<std::size_t>(std::lround(cfg.fp_rate * static_cast<double>(n)));

    std::mt19937_64 rng(cfg.seed);

    // Draw the drop set first so the survivor stream does not depend on it.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<bool> dropped(n, false);
    for (std::size_t i = 0; i < n_drop; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(bounded(rng, n - i));
        std::swap(order[i], order[j]);
        dropped[order[i]] = true;
    }

    const double W = size.width;
    const double H = size.height;
    auto clamp_into_frame = [&](PixelBox& box) {
        box.w = std::min(box.w, W);
        box.h = std::min(box.h, H);
        box.cx = std::clamp(box.cx, box.w / 2.0, W - box.w / 2.0);
        box.cy = std::clamp(box.cy, box.h / 2.0, H - box.h / 2.0);
    };

    std::vector<PixelBox> out;
    out.reserve(n - n_drop + n_fp);
    for (std::size_t i = 0; i < n; ++i) {
        // Draw the full tuple regardless of drop status so the stream layout
        // depends only on N, keeping per-box values stable across fn rates.
        const double dx = uniform_in(rng, -1.0, 1.0) * cfg.center_jitter;
        const double dy = uniform_in(rng, -1.0, 1.0) * cfg.center_jitter;
        const double sw = 1.0 + uniform_in(rng, -1.0, 1.0) * cfg.size_jitter;
        const double sh = 1.0 + uniform_in(rng, -1.0, 1.0) * cfg.size_jitter;
        const double conf = 0.5 + 0.5 * uniform01(rng);
        if (dropped[i]) continue;

        PixelBox box = gt[i];
        box.cx += dx;
        box.cy += dy;
        box.w = std::max(box.w * sw, 1e-6);
        box.h = std::max(box.h * sh, 1e-6);
        box.confidence = conf;
        clamp_into_frame(box);
        out.push_back(box);
    }

    for (std::size_t k = 0; k < n_fp; ++k) {
        const std::size_t src = static_cast<std::size_t>(bounded(rng, n));
        PixelBox fake;
        fake.w = gt[src].w;
        fake.h = gt[src].h;
        fake.cx = uniform01(rng) * W;
        fake.cy = uniform01(rng) * H;
        fake.category_id = gt[src].category_id;
        fake.confidence = 0.3 + 0.6 * uniform01(rng);
        clamp_into_frame(fake);
        out.push_back(fake);
    }
    return out;
}

std::vector<PixelBox> SyntheticBackend::detect(const ImageRef& ref) {
    const DatasetEntry* entry = gt_.find(ref.image_id);
    if (!entry) throw BackendError("ground-truth store has no entry for image '" + ref.image_id + "'");
    ImageSize size = ref.size.valid() ? ref.size : entry->image_size.value_or(ImageSize{});
    if (!size.valid()) throw BackendError("no image size known for '" + ref.image_id + "'");

    SyntheticNoiseConfig per_image = cfg_;
    per_image.seed = mix_seed(cfg_.seed, fnv1a(ref.image_id));
    return detect_synthetic(replay_entry(*entry, size), size, per_image);
}

ExternalAdapterConfig ExternalAdapterConfig::from_env(std::string command) {
    ExternalAdapterConfig cfg;
    cfg.command = std::move(command);
    if (const char* raw = std::getenv("ANTCENSUS_EXTERNAL_TIMEOUT_SECS")) {
        char* end = nullptr;
        const double secs = std::strtod(raw, &end);
        if (end == raw || *end != '\0' || !(secs > 0.0)) {
            throw UsageError("ANTCENSUS_EXTERNAL_TIMEOUT_SECS must be a positive number, got '" +
                             std::string(raw) + "'");
        }
        cfg.timeout_secs = secs;
    }
    return cfg;
}

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out.push_back(c);
        }
    }
    out.push_back('\'');
    return out;
}

fs::path unique_temp_path(const std::string& suffix) {
    static std::atomic<std::uint64_t> counter{0};
    const auto id = counter.fetch_add(1);
    return fs::temp_directory_path() /
           ("antcensus_" + std::to_string(::getpid()) + "_" + std::to_string(id) + suffix);
}

std::string tail_of(const std::string& text, std::size_t max_bytes = 2000) {
    if (text.size() <= max_bytes) return text;
    return "..." + text.substr(text.size() - max_bytes);
}

// Runs `/bin/sh -c command` with stdout+stderr captured to log_path.
// Returns the exit status; throws BackendError on launch failure or timeout.
int run_with_timeout(const std::string& command, const fs::path& log_path, double timeout_secs) {
    const pid_t pid = ::fork();
    if (pid < 0) throw BackendError("fork failed for external runtime");
    if (pid == 0) {
        if (std::FILE* log = std::fopen(log_path.c_str(), "wb")) {
            ::dup2(::fileno(log), STDOUT_FILENO);
            ::dup2(::fileno(log), STDERR_FILENO);
            std::fclose(log);
        }
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }

    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_secs);
    int status = 0;
    while (true) {
        const pid_t done = ::waitpid(pid, &status, WNOHANG);
        if (done == pid) break;
        if (done < 0) throw BackendError("waitpid failed for external runtime");
        if (std::chrono::steady_clock::now() >= deadline) {
            ::kill(pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            throw BackendError("external runtime timed out after " + std::to_string(timeout_secs) +
                               "s: " + command);
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
    return -1;
}

} // namespace

std::vector<PixelBox> detect_external(const ImageRef& ref, const ExternalAdapterConfig& cfg) {
    if (cfg.command.empty()) throw BackendError("external adapter has no command configured");
    if (!ref.image_path) {
        throw BackendError("external adapter needs an image file for '" + ref.image_id + "'");
    }

    const fs::path out_path = unique_temp_path(".txt");
    const fs::path log_path = unique_temp_path(".log");
    const std::string command = cfg.command + " --input " + shell_quote(ref.image_path->string()) +
                                " --output " + shell_quote(out_path.string());

    std::error_code ignored;
    const int exit_code = run_with_timeout(command, log_path, cfg.timeout_secs);
    std::string log;
    if (fs::exists(log_path)) {
        log = read_text_file(log_path);
        fs::remove(log_path, ignored);
    }
    if (exit_code != 0) {
        fs::remove(out_path, ignored);
        throw BackendError("external runtime exited with code " + std::to_string(exit_code) +
                           " for image '" + ref.image_id + "'" +
                           (log.empty() ? "" : "; output:\n" + tail_of(log)));
    }

    std::vector<AnnotationRecord> records;
    if (fs::exists(out_path)) {
        const std::string text = read_text_file(out_path);
        fs::remove(out_path, ignored);
        try {
            records = parse_label_text(text);
        } catch (const ParseError& e) {
            throw BackendError("external runtime wrote malformed detections for image '" +
                               ref.image_id + "': " + e.what());
        }
    }

    std::vector<PixelBox> dets;
    dets.reserve(records.size());
    for (const auto& rec : records) dets.push_back(denormalize(rec, ref.size));
    return dets;
}

std::vector<PixelBox> ExternalBackend::detect(const ImageRef& ref) {
    std::lock_guard<std::mutex> lock(serialize_);
    return detect_external(ref, cfg_);
}

std::vector<PixelBox> sliced_detect(const ImageRef& ref, const GridSpec& grid,
                                    DetectorBackend& backend, double merge_iou) {
    if (!ref.size.valid()) throw std::invalid_argument("image size must be at least 1x1");

    if (grid.cols == 1 && grid.rows == 1) {
        return merge(checked_detect(backend, ref), merge_iou);
    }

    const TileGrid tiles = plan_grid(ref.size, grid.cols, grid.rows, grid.overlap_fraction);
    const std::size_t tile_count = tiles.tiles.size();
    std::vector<std::vector<PixelBox>> per_tile(tile_count);
    std::string failed_tile;
    std::string failure_reason;
    bool backend_failure = false;

    #pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < tile_count; ++i) {
        const Tile& tile = tiles.tiles[i];
        try {
            ImageRef tile_ref;
            tile_ref.image_id = tile_id(ref.image_id, tile);
            tile_ref.size = ImageSize{tile.width, tile.height};
            auto dets = checked_detect(backend, tile_ref);
            for (auto& det : dets) det = to_global(det, tile);
            per_tile[i] = std::move(dets);
        } catch (const std::exception& e) {
            #pragma omp critical
            if (failed_tile.empty() || tile_id(ref.image_id, tile) < failed_tile) {
                failed_tile = tile_id(ref.image_id, tile);
                failure_reason = e.what();
                backend_failure = true;
            }
        }
    }
    if (backend_failure) {
        throw BackendError("detection failed on tile '" + failed_tile + "': " + failure_reason);
    }

    std::vector<PixelBox> all;
    for (auto& dets : per_tile) all.insert(all.end(), dets.begin(), dets.end());
    return merge(std::move(all), merge_iou);
}

} // namespace antcensus
