#include "antcensus/cli.hpp"

#include "antcensus/analytics.hpp"
#include "antcensus/annotation_io.hpp"
#include "antcensus/detector.hpp"
#include "antcensus/errors.hpp"
#include "antcensus/evaluation.hpp"
#include "antcensus/heatmap.hpp"
#include "antcensus/png_io.hpp"
#include "antcensus/tiling.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <set>

namespace fs = std::filesystem;

namespace antcensus {

namespace {

std::string format_shortest(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string format_fixed6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

/// Writes CSV text to a file, or to stdout when the path is "-".
void emit_csv(const std::string& out_path, const std::string& text) {
    if (out_path == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
        std::fflush(stdout);
        return;
    }
    write_text_file(out_path, text);
}

void ensure_out_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw DataError("cannot create output directory: " + dir.string());
    }
}

bool looks_like_jpeg(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".jpg" || ext == ".jpeg";
}

/// Resolves the pixel frame for an image: explicit manifest first, then the
/// image header.
ImageSize lookup_size(const std::string& image_id, const std::map<std::string, ImageSize>& manifest,
                      const DatasetEntry* entry) {
    if (const auto it = manifest.find(image_id); it != manifest.end()) return it->second;
    if (entry && entry->image_size) return *entry->image_size;
    throw DataError("no image size known for '" + image_id +
                    "' (provide it via --sizes or a readable image header)");
}

std::vector<AnnotationRecord> parse_label_file(const fs::path& path) {
    try {
        return parse_label_text(read_text_file(path));
    } catch (const ParseError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

bool any_confidence(const std::vector<AnnotationRecord>& records) {
    return std::any_of(records.begin(), records.end(),
                       [](const AnnotationRecord& r) { return r.confidence.has_value(); });
}

// ---------------------------------------------------------------------------
// slice

struct SliceArgs {
    std::string images_dir;
    std::string out_dir;
    int cols = 1, rows = 1;
    double overlap = 0.0;
};

int cmd_slice(const SliceArgs& args) {
    const DatasetIndex index = index_dataset(args.images_dir, "");
    ensure_out_dir(args.out_dir);

    std::vector<TileManifestRow> manifest;
    std::size_t images = 0;
    for (const auto& entry : index.entries) {
        if (!entry.image_path) continue;
        if (looks_like_jpeg(*entry.image_path)) {
            throw DataError("JPEG slicing is not supported, provide PNG images: " +
                            entry.image_path->string());
        }
        const ImageRgb8 image = read_png_rgb8(*entry.image_path);
        const TileGrid grid =
            plan_grid(ImageSize{image.width, image.height}, args.cols, args.rows, args.overlap);
        for (const Tile& tile : grid.tiles) {
            const std::string id = tile_id(entry.image_id, tile);
            const ImageRgb8 piece = crop(image, tile.x_offset, tile.y_offset, tile.width, tile.height);
            write_png_rgb8(fs::path(args.out_dir) / (id + ".png"), piece);
            manifest.push_back({id, entry.image_id, tile});
        }
        ++images;
    }
    write_text_file(fs::path(args.out_dir) / "tile_manifest.csv", write_tile_manifest(manifest));
    std::cerr << "sliced " << images << " image(s) into " << manifest.size() << " tile(s)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// slice-labels

struct SliceLabelsArgs {
    std::string labels_dir;
    std::string sizes_file;
    std::string out_dir;
    int cols = 1, rows = 1;
    double overlap = 0.0;
    double min_visibility = 0.3;
};

int cmd_slice_labels(const SliceLabelsArgs& args) {
    const DatasetIndex index = index_dataset("", args.labels_dir);
    const auto sizes = read_size_manifest_file(args.sizes_file);
    ensure_out_dir(args.out_dir);

    std::vector<TileManifestRow> manifest;
    std::map<std::string, ImageSize> tile_sizes;
    for (const auto& entry : index.entries) {
        if (!entry.label_path) continue;
        const ImageSize size = lookup_size(entry.image_id, sizes, &entry);
        const auto records = parse_label_file(*entry.label_path);
        const bool with_conf = any_confidence(records);

        std::vector<PixelBox> boxes;
        boxes.reserve(records.size());
        for (const auto& rec : records) boxes.push_back(denormalize(rec, size));

        const TileGrid grid = plan_grid(size, args.cols, args.rows, args.overlap);
        for (const Tile& tile : grid.tiles) {
            const std::string id = tile_id(entry.image_id, tile);
            const ImageSize tile_size{tile.width, tile.height};
            const auto local = slice_boxes(boxes, tile, args.min_visibility);
            std::vector<AnnotationRecord> out_records;
            out_records.reserve(local.size());
            for (const auto& box : local) out_records.push_back(normalize(box, tile_size));
            write_text_file(fs::path(args.out_dir) / (id + ".txt"),
                            write_label_text(out_records, with_conf));
            manifest.push_back({id, entry.image_id, tile});
            tile_sizes.emplace(id, tile_size);
        }
    }
    write_text_file(fs::path(args.out_dir) / "tile_manifest.csv", write_tile_manifest(manifest));
    write_text_file(fs::path(args.out_dir) / "sizes.csv", write_size_manifest(tile_sizes));
    std::cerr << "wrote " << manifest.size() << " tile label file(s)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// detect

struct DetectArgs {
    std::string backend;
    std::string images_dir;
    std::string sizes_file;
    std::string replay_dir;
    std::string labels_dir;
    std::string command;
    std::string out_dir;
    double fn_rate = 0.0, fp_rate = 0.0, center_jitter = 0.0, size_jitter = 0.0;
    std::int64_t seed = 0;
    bool seed_given = false;
    int cols = 0, rows = 0;
    double overlap = 0.0;
    double merge_iou = 0.5;
};

int cmd_detect(const DetectArgs& args) {
    const bool gridded = args.cols > 0 || args.rows > 0;
    if (gridded && (args.cols < 1 || args.rows < 1)) {
        throw UsageError("--cols and --rows must be given together");
    }
    if (args.images_dir.empty() && args.sizes_file.empty()) {
        throw UsageError("detect needs --images and/or --sizes to enumerate images");
    }

    std::unique_ptr<DetectorBackend> backend;
    if (args.backend == "replay") {
        if (args.replay_dir.empty()) throw UsageError("--backend replay needs --replay DIR");
        backend = std::make_unique<ReplayBackend>(index_dataset("", args.replay_dir));
    } else if (args.backend == "synthetic") {
        if (args.labels_dir.empty()) throw UsageError("--backend synthetic needs --labels DIR");
        if (!args.seed_given) throw UsageError("--backend synthetic needs an explicit --seed");
        if (gridded) {
            throw UsageError("synthetic detection does not take a grid; use slice-labels + detect + merge");
        }
        SyntheticNoiseConfig cfg;
        cfg.fn_rate = args.fn_rate;
        cfg.fp_rate = args.fp_rate;
        cfg.center_jitter = args.center_jitter;
        cfg.size_jitter = args.size_jitter;
        cfg.seed = static_cast<std::uint64_t>(args.seed);
        backend = std::make_unique<SyntheticBackend>(index_dataset("", args.labels_dir), cfg);
    } else {
        if (args.command.empty()) throw UsageError("--backend external needs --command CMD");
        if (args.images_dir.empty()) throw UsageError("--backend external needs --images DIR");
        if (gridded) {
            throw UsageError("external detection does not take a grid; use slice + detect + merge");
        }
        backend = std::make_unique<ExternalBackend>(ExternalAdapterConfig::from_env(args.command));
    }

    std::map<std::string, ImageSize> sizes;
    if (!args.sizes_file.empty()) sizes = read_size_manifest_file(args.sizes_file);

    std::vector<ImageRef> refs;
    if (!args.images_dir.empty()) {
        const DatasetIndex images = index_dataset(args.images_dir, "");
        for (const auto& entry : images.entries) {
            if (!entry.image_path) continue;
            refs.push_back({entry.image_id, lookup_size(entry.image_id, sizes, &entry), entry.image_path});
        }
    } else {
        for (const auto& [id, size] : sizes) refs.push_back({id, size, std::nullopt});
    }

    ensure_out_dir(args.out_dir);
    const GridSpec grid{std::max(args.cols, 1), std::max(args.rows, 1), args.overlap};
    for (const auto& ref : refs) {
        const auto dets =
            gridded ? sliced_detect(ref, grid, *backend, args.merge_iou) : checked_detect(*backend, ref);
        std::vector<AnnotationRecord> records;
        records.reserve(dets.size());
        for (const auto& det : dets) records.push_back(normalize(det, ref.size, BoundsPolicy::clamp));
        write_text_file(fs::path(args.out_dir) / (ref.image_id + ".txt"),
                        write_label_text(records, /*with_confidence=*/true));
    }
    std::cerr << "wrote detections for " << refs.size() << " image(s)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// merge

struct MergeArgs {
    std::string dets_dir;
    std::string manifest_file;
    std::string out_dir;
    double merge_iou = 0.5;
};

int cmd_merge(const MergeArgs& args) {
    std::vector<TileManifestRow> manifest;
    try {
        manifest = parse_tile_manifest(read_text_file(args.manifest_file));
    } catch (const ParseError& e) {
        throw DataError(args.manifest_file + ": " + e.what());
    }

    std::map<std::string, std::vector<TileManifestRow>> by_image;
    for (auto& row : manifest) by_image[row.image_id].push_back(row);

    ensure_out_dir(args.out_dir);
    for (const auto& [image_id, rows] : by_image) {
        ImageSize size{0, 0};
        for (const auto& row : rows) {
            size.width = std::max(size.width, row.tile.x_offset + row.tile.width);
            size.height = std::max(size.height, row.tile.y_offset + row.tile.height);
        }
        std::vector<PixelBox> all;
        for (const auto& row : rows) {
            const fs::path det_path = fs::path(args.dets_dir) / (row.tile_id + ".txt");
            if (!fs::exists(det_path)) continue; // absent tile file = zero detections
            const ImageSize tile_size{row.tile.width, row.tile.height};
            for (const auto& rec : parse_label_file(det_path)) {
                all.push_back(to_global(denormalize(rec, tile_size), row.tile));
            }
        }
        const auto merged = merge(std::move(all), args.merge_iou);
        std::vector<AnnotationRecord> records;
        records.reserve(merged.size());
        for (const auto& det : merged) records.push_back(normalize(det, size, BoundsPolicy::clamp));
        write_text_file(fs::path(args.out_dir) / (image_id + ".txt"),
                        write_label_text(records, /*with_confidence=*/true));
    }
    std::cerr << "merged tiles into " << by_image.size() << " image(s)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
    std::string pred_dir;
    std::string gt_dir;
    std::string sizes_file;
    std::string out_path;
    double iou = 0.6;
    double conf = 0.25;
};

int cmd_eval(const EvalArgs& args) {
    const auto sizes = read_size_manifest_file(args.sizes_file);
    const DatasetIndex preds = index_dataset("", args.pred_dir);
    const DatasetIndex gts = index_dataset("", args.gt_dir);

    std::set<std::string> ids;
    for (const auto& e : preds.entries) ids.insert(e.image_id);
    for (const auto& e : gts.entries) ids.insert(e.image_id);

    const EvalConfig cfg{args.iou, args.conf};
    struct Row {
        std::string image_id;
        MatchReport report;
    };
    std::vector<Row> rows;
    for (const auto& id : ids) {
        const ImageSize size = lookup_size(id, sizes, nullptr);
        auto load = [&](const DatasetIndex& index) {
            std::vector<PixelBox> boxes;
            if (const DatasetEntry* entry = index.find(id); entry && entry->label_path) {
                for (const auto& rec : parse_label_file(*entry->label_path)) {
                    boxes.push_back(denormalize(rec, size));
                }
            }
            return boxes;
        };
        rows.push_back({id, match(load(preds), load(gts), cfg)});
    }

    std::size_t tp = 0, fp = 0, fn = 0;
    double macro_precision = 0.0, macro_recall = 0.0;
    std::string csv = "image_id,tp,fp,fn,precision,recall\n";
    for (const auto& row : rows) {
        tp += row.report.tp;
        fp += row.report.fp;
        fn += row.report.fn;
        macro_precision += row.report.precision;
        macro_recall += row.report.recall;
        csv += row.image_id + ',' + std::to_string(row.report.tp) + ',' + std::to_string(row.report.fp) +
               ',' + std::to_string(row.report.fn) + ',' + format_fixed6(row.report.precision) + ',' +
               format_fixed6(row.report.recall) + '\n';
    }
    const double micro_precision = tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double micro_recall = tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    csv += "TOTAL," + std::to_string(tp) + ',' + std::to_string(fp) + ',' + std::to_string(fn) + ',' +
           format_fixed6(micro_precision) + ',' + format_fixed6(micro_recall) + '\n';
    emit_csv(args.out_path, csv);

    // Human-readable summary (micro = pooled tallies, macro = per-image mean).
    std::cerr << "images evaluated: " << rows.size() << "\n"
              << "TOTAL  tp=" << tp << " fp=" << fp << " fn=" << fn
              << "  precision=" << format_fixed6(micro_precision)
              << " recall=" << format_fixed6(micro_recall) << " (micro)\n";
    if (!rows.empty()) {
        std::cerr << "MACRO  precision=" << format_fixed6(macro_precision / rows.size())
                  << " recall=" << format_fixed6(macro_recall / rows.size()) << " (per-image mean)\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// agree

std::map<std::string, double> parse_count_csv(const std::string& path) {
    const std::string text = read_text_file(path);
    std::map<std::string, double> counts;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string line = text.substr(pos, (eol == std::string::npos ? text.size() : eol) - pos);
        pos = eol == std::string::npos ? text.size() : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "image_id,count") {
                throw DataError(path + ": count file must start with header 'image_id,count'");
            }
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw DataError(path + ": line " + std::to_string(line_no) + ": expected 'image_id,count'");
        }
        const std::string id = line.substr(0, comma);
        double value = 0.0;
        const char* begin = line.data() + comma + 1;
        const char* end = line.data() + line.size();
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc{} || ptr != end) {
            throw DataError(path + ": line " + std::to_string(line_no) + ": bad count value");
        }
        if (!counts.emplace(id, value).second) {
            throw DataError(path + ": line " + std::to_string(line_no) + ": duplicate image_id '" + id + "'");
        }
    }
    return counts;
}

struct AgreeArgs {
    std::string manual_file;
    std::string auto_file;
    std::string out_path;
};

int cmd_agree(const AgreeArgs& args) {
    const auto manual_counts = parse_count_csv(args.manual_file);
    const auto auto_counts = parse_count_csv(args.auto_file);
    for (const auto& [id, v] : manual_counts) {
        if (!auto_counts.count(id)) {
            throw DataError("image '" + id + "' present in " + args.manual_file + " but missing from " +
                            args.auto_file);
        }
    }
    for (const auto& [id, v] : auto_counts) {
        if (!manual_counts.count(id)) {
            throw DataError("image '" + id + "' present in " + args.auto_file + " but missing from " +
                            args.manual_file);
        }
    }

    std::vector<double> manual_vec, auto_vec;
    for (const auto& [id, v] : manual_counts) {
        manual_vec.push_back(v);
        auto_vec.push_back(auto_counts.at(id));
    }
    AgreementReport report;
    try {
        report = count_agreement(manual_vec, auto_vec);
    } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
    }

    std::string csv = "n,r_squared,rmse\n";
    csv += std::to_string(report.n) + ',' +
           (report.r_squared ? format_shortest(*report.r_squared) : std::string()) + ',' +
           format_shortest(report.rmse) + '\n';
    emit_csv(args.out_path, csv);
    std::cerr << "n=" << report.n
              << " r_squared=" << (report.r_squared ? format_shortest(*report.r_squared) : "undefined")
              << " rmse=" << format_shortest(report.rmse) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// heatmap

struct HeatmapArgs {
    std::string dets_dir;
    std::string sizes_file;
    std::string out_path;
    std::string raw_path;
    std::string kernel = "standard";
    std::string colormap = "inferno";
    int grid = 1000;
};

int cmd_heatmap(const HeatmapArgs& args) {
    const auto sizes = read_size_manifest_file(args.sizes_file);
    const DatasetIndex dets_index = index_dataset("", args.dets_dir);

    KernelMode mode;
    mode.variant = args.kernel == "standard" ? KernelVariant::standard : KernelVariant::literal;

    HeatGrid grid = make_grid(args.grid, args.grid, ImageSize{args.grid, args.grid});
    std::size_t total_dets = 0;
    bool frame_set = false;
    for (const auto& entry : dets_index.entries) {
        if (!entry.label_path) continue;
        const ImageSize size = lookup_size(entry.image_id, sizes, &entry);
        if (!frame_set) {
            grid.source_frame = size;
            frame_set = true;
        }
        std::vector<PixelBox> boxes;
        for (const auto& rec : parse_label_file(*entry.label_path)) {
            boxes.push_back(denormalize(rec, size));
        }
        accumulate(grid, boxes, size, mode);
        total_dets += boxes.size();
    }

    const auto scaled = scale_for_render(grid);
    const auto pixels = render(scaled, grid.grid_w, grid.grid_h, args.colormap);
    ImageRgb8 image;
    image.width = grid.grid_w;
    image.height = grid.grid_h;
    image.pixels = pixels;
    write_png_rgb8(args.out_path, image);
    if (!args.raw_path.empty()) write_text_file(args.raw_path, write_grid_csv(grid));
    std::cerr << "accumulated " << total_dets << " detection(s) onto a " << grid.grid_w << "x"
              << grid.grid_h << " grid\n";
    return 0;
}

// ---------------------------------------------------------------------------
// timeseries

struct TimeseriesArgs {
    std::string dets_dir;
    std::string times_file;
    std::string sizes_file;
    std::string out_path;
    std::string plot_path;
    std::string line_spec;
    std::optional<double> line_vertical;
    std::optional<double> bin_hours;
};

int cmd_timeseries(const TimeseriesArgs& args) {
    std::optional<Separator> separator;
    if (!args.line_spec.empty() && args.line_vertical) {
        throw UsageError("--line and --line-vertical are mutually exclusive");
    }
    if (!args.line_spec.empty()) {
        const auto comma = args.line_spec.find(',');
        double a = 0.0, b = 0.0;
        bool ok = comma != std::string::npos;
        if (ok) {
            const char* s = args.line_spec.data();
            auto r1 = std::from_chars(s, s + comma, a);
            auto r2 = std::from_chars(s + comma + 1, s + args.line_spec.size(), b);
            ok = r1.ec == std::errc{} && r1.ptr == s + comma && r2.ec == std::errc{} &&
                 r2.ptr == s + args.line_spec.size();
        }
        if (!ok) throw UsageError("--line expects 'a,b' (slope,intercept), got '" + args.line_spec + "'");
        separator = LineSeparator{a, b};
    } else if (args.line_vertical) {
        separator = VerticalLine{*args.line_vertical};
    }
    if (separator && args.sizes_file.empty()) {
        throw UsageError("--line/--line-vertical need --sizes to place detections in pixel space");
    }

    std::map<std::string, ImageSize> sizes;
    if (!args.sizes_file.empty()) sizes = read_size_manifest_file(args.sizes_file);

    std::vector<std::pair<std::string, double>> manifest;
    try {
        manifest = parse_time_manifest(read_text_file(args.times_file));
    } catch (const ParseError& e) {
        throw DataError(args.times_file + ": " + e.what());
    }

    const DatasetIndex dets_index = index_dataset("", args.dets_dir);
    std::map<std::string, std::vector<PixelBox>> per_image;
    for (const auto& entry : dets_index.entries) {
        if (!entry.label_path) continue;
        // Counts do not need the pixel frame; line splitting does.
        const ImageSize size = separator ? lookup_size(entry.image_id, sizes, &entry) : ImageSize{1, 1};
        std::vector<PixelBox> boxes;
        for (const auto& rec : parse_label_file(*entry.label_path)) {
            boxes.push_back(denormalize(rec, size));
        }
        per_image.emplace(entry.image_id, std::move(boxes));
    }

    const auto rows = build_timeseries(per_image, manifest, separator, args.bin_hours);
    emit_csv(args.out_path, export_series_csv(rows));
    if (!args.plot_path.empty()) write_text_file(args.plot_path, render_series_svg(rows));
    std::cerr << "series with " << rows.size() << " row(s)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// sample-plan

struct SamplePlanArgs {
    std::int64_t pool = 0;
    std::int64_t n = 0;
    std::int64_t replicates = 0;
    std::int64_t seed = 0;
    std::string out_path;
};

int cmd_sample_plan(const SamplePlanArgs& args) {
    const auto plans =
        bootstrap_subsets(static_cast<std::size_t>(args.pool), static_cast<std::size_t>(args.n),
                          static_cast<std::size_t>(args.replicates), static_cast<std::uint64_t>(args.seed));
    std::string csv = "replicate,position,index\n";
    for (std::size_t rep = 0; rep < plans.size(); ++rep) {
        for (std::size_t pos = 0; pos < plans[rep].size(); ++pos) {
            csv += std::to_string(rep) + ',' + std::to_string(pos) + ',' +
                   std::to_string(plans[rep][pos]) + '\n';
        }
    }
    emit_csv(args.out_path, csv);
    std::cerr << "planned " << plans.size() << " replicate(s) of " << args.n << " draw(s) from a pool of "
              << args.pool << "\n";
    return 0;
}

} // namespace

int run_cli(std::vector<std::string> args) {
    CLI::App app{"ant counting and foraging-analytics toolkit"};
    app.set_help_all_flag("--help-all", "print help for every subcommand");
    app.require_subcommand(1);

    // slice
    SliceArgs slice_args;
    auto* slice = app.add_subcommand("slice", "crop images into a cols x rows tile grid");
    slice->add_option("--images", slice_args.images_dir, "directory of PNG images")->required();
    slice->add_option("--cols", slice_args.cols, "grid columns")->required()->check(CLI::PositiveNumber);
    slice->add_option("--rows", slice_args.rows, "grid rows")->required()->check(CLI::PositiveNumber);
    slice->add_option("--overlap", slice_args.overlap, "tile overlap fraction (default 0)")
        ->check(CLI::Range(0.0, 0.4999));
    slice->add_option("--out", slice_args.out_dir, "output directory for crops + tile_manifest.csv")
        ->required();

    // slice-labels
    SliceLabelsArgs slice_labels_args;
    auto* slice_labels =
        app.add_subcommand("slice-labels", "split label files onto a tile grid (tile-local coordinates)");
    slice_labels->add_option("--labels", slice_labels_args.labels_dir, "directory of label .txt files")
        ->required();
    slice_labels
        ->add_option("--sizes", slice_labels_args.sizes_file, "size manifest CSV (image_id,width,height)")
        ->required();
    slice_labels->add_option("--cols", slice_labels_args.cols, "grid columns")
        ->required()
        ->check(CLI::PositiveNumber);
    slice_labels->add_option("--rows", slice_labels_args.rows, "grid rows")
        ->required()
        ->check(CLI::PositiveNumber);
    slice_labels->add_option("--overlap", slice_labels_args.overlap, "tile overlap fraction (default 0)")
        ->check(CLI::Range(0.0, 0.4999));
    slice_labels
        ->add_option("--min-visibility", slice_labels_args.min_visibility,
                     "minimum visible area fraction to keep a straddling box (default 0.3)")
        ->check(CLI::Range(1e-9, 1.0));
    slice_labels->add_option("--out", slice_labels_args.out_dir, "output directory")->required();

    // detect
    DetectArgs detect_args;
    auto* detect = app.add_subcommand("detect", "produce detection files with a pluggable backend");
    detect->add_option("--backend", detect_args.backend, "replay | synthetic | external")
        ->required()
        ->check(CLI::IsMember({"replay", "synthetic", "external"}));
    detect->add_option("--images", detect_args.images_dir, "directory of images to detect on");
    detect->add_option("--sizes", detect_args.sizes_file, "size manifest CSV (image_id,width,height)");
    detect->add_option("--replay", detect_args.replay_dir, "replay: directory of stored detections/labels");
    detect->add_option("--labels", detect_args.labels_dir, "synthetic: ground-truth label directory");
    detect->add_option("--fn-rate", detect_args.fn_rate, "synthetic: dropped fraction (default 0)")
        ->check(CLI::Range(0.0, 1.0));
    detect->add_option("--fp-rate", detect_args.fp_rate, "synthetic: false boxes per true box (default 0)")
        ->check(CLI::NonNegativeNumber);
    detect
        ->add_option("--center-jitter", detect_args.center_jitter,
                     "synthetic: max center displacement in pixels (default 0)")
        ->check(CLI::NonNegativeNumber);
    detect
        ->add_option("--size-jitter", detect_args.size_jitter,
                     "synthetic: max relative size change (default 0)")
        ->check(CLI::NonNegativeNumber);
    auto* seed_opt = detect->add_option("--seed", detect_args.seed, "synthetic: RNG seed (required)");
    detect->add_option("--command", detect_args.command,
                       "external: command invoked as CMD --input IMG --output DETS");
    detect->add_option("--cols", detect_args.cols, "sliced pipeline: grid columns")
        ->check(CLI::PositiveNumber);
    detect->add_option("--rows", detect_args.rows, "sliced pipeline: grid rows")
        ->check(CLI::PositiveNumber);
    detect->add_option("--overlap", detect_args.overlap, "sliced pipeline: overlap fraction (default 0)")
        ->check(CLI::Range(0.0, 0.4999));
    detect
        ->add_option("--merge-iou", detect_args.merge_iou,
                     "sliced pipeline: duplicate-suppression IoU (default 0.5)")
        ->check(CLI::Range(1e-9, 1.0));
    detect->add_option("--out", detect_args.out_dir, "output directory for detection files")->required();

    // merge
    MergeArgs merge_args;
    auto* merge_cmd = app.add_subcommand("merge", "fuse per-tile detections into full-image files");
    merge_cmd->add_option("--dets", merge_args.dets_dir, "directory of per-tile detection files")
        ->required();
    merge_cmd->add_option("--manifest", merge_args.manifest_file, "tile manifest CSV")->required();
    merge_cmd
        ->add_option("--merge-iou", merge_args.merge_iou,
                     "duplicate-suppression IoU threshold (default 0.5)")
        ->check(CLI::Range(1e-9, 1.0));
    merge_cmd->add_option("--out", merge_args.out_dir, "output directory")->required();

    // eval
    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
    eval->add_option("--pred", eval_args.pred_dir, "directory of predicted detection files")->required();
    eval->add_option("--gt", eval_args.gt_dir, "directory of ground-truth label files")->required();
    eval->add_option("--sizes", eval_args.sizes_file, "size manifest CSV (image_id,width,height)")
        ->required();
    eval->add_option("--iou", eval_args.iou, "IoU match threshold (default 0.6)")
        ->check(CLI::Range(1e-9, 1.0));
    eval->add_option("--conf", eval_args.conf, "confidence threshold (default 0.25)")
        ->check(CLI::Range(0.0, 1.0));
    eval->add_option("--out", eval_args.out_path, "report CSV path, or - for stdout")->required();

    // agree
    AgreeArgs agree_args;
    auto* agree = app.add_subcommand("agree", "compare manual vs automated counts (r^2, RMSE)");
    agree->add_option("--manual", agree_args.manual_file, "manual counts CSV (image_id,count)")
        ->required();
    agree->add_option("--auto", agree_args.auto_file, "automated counts CSV (image_id,count)")
        ->required();
    agree->add_option("--out", agree_args.out_path, "report CSV path, or - for stdout")->required();

    // heatmap
    HeatmapArgs heatmap_args;
    auto* heatmap = app.add_subcommand("heatmap", "accumulate detections into an activity heatmap PNG");
    heatmap->add_option("--dets", heatmap_args.dets_dir, "directory of detection files")->required();
    heatmap->add_option("--sizes", heatmap_args.sizes_file, "size manifest CSV (image_id,width,height)")
        ->required();
    heatmap->add_option("--grid", heatmap_args.grid, "grid resolution (default 1000)")
        ->check(CLI::Range(1, 10000));
    heatmap->add_option("--kernel", heatmap_args.kernel, "standard | literal (default standard)")
        ->check(CLI::IsMember({"standard", "literal"}));
    heatmap->add_option("--colormap", heatmap_args.colormap, "inferno | gray (default inferno)")
        ->check(CLI::IsMember({"inferno", "gray"}));
    heatmap->add_option("--out", heatmap_args.out_path, "output PNG path")->required();
    heatmap->add_option("--raw", heatmap_args.raw_path, "also write the raw grid as CSV");

    // timeseries
    TimeseriesArgs ts_args;
    double ts_vertical = 0.0;
    double ts_bin = 0.0;
    auto* timeseries = app.add_subcommand("timeseries", "build timestamped count series (optional line split)");
    timeseries->add_option("--dets", ts_args.dets_dir, "directory of detection files")->required();
    timeseries->add_option("--times", ts_args.times_file, "time manifest CSV (image_id,timestamp)")
        ->required();
    timeseries->add_option("--sizes", ts_args.sizes_file,
                           "size manifest CSV; required with --line/--line-vertical");
    timeseries->add_option("--line", ts_args.line_spec, "separator line 'a,b' for y = a*x + b");
    auto* vertical_opt =
        timeseries->add_option("--line-vertical", ts_vertical, "vertical separator at x = X");
    auto* bin_opt = timeseries->add_option("--bin", ts_bin, "bin width in hours")
                        ->check(CLI::PositiveNumber);
    timeseries->add_option("--out", ts_args.out_path, "series CSV path, or - for stdout")->required();
    timeseries->add_option("--plot", ts_args.plot_path, "also write a minimal SVG line plot");

    // sample-plan
    SamplePlanArgs plan_args;
    auto* plan = app.add_subcommand("sample-plan", "emit seeded bootstrap subset index plans");
    plan->add_option("--pool", plan_args.pool, "pool size")->required()->check(CLI::PositiveNumber);
    plan->add_option("--n", plan_args.n, "sample size per replicate")
        ->required()
        ->check(CLI::PositiveNumber);
    plan->add_option("--replicates", plan_args.replicates, "number of replicates")
        ->required()
        ->check(CLI::PositiveNumber);
    plan->add_option("--seed", plan_args.seed, "RNG seed")->required();
    plan->add_option("--out", plan_args.out_path, "plan CSV path, or - for stdout")->required();

    try {
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (slice->parsed()) return cmd_slice(slice_args);
        if (slice_labels->parsed()) return cmd_slice_labels(slice_labels_args);
        if (detect->parsed()) {
            detect_args.seed_given = seed_opt->count() > 0;
            return cmd_detect(detect_args);
        }
        if (merge_cmd->parsed()) return cmd_merge(merge_args);
        if (eval->parsed()) return cmd_eval(eval_args);
        if (agree->parsed()) return cmd_agree(agree_args);
        if (heatmap->parsed()) return cmd_heatmap(heatmap_args);
        if (timeseries->parsed()) {
            if (vertical_opt->count() > 0) ts_args.line_vertical = ts_vertical;
            if (bin_opt->count() > 0) ts_args.bin_hours = ts_bin;
            return cmd_timeseries(ts_args);
        }
        if (plan->parsed()) return cmd_sample_plan(plan_args);
        throw UsageError("no subcommand given");
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace antcensus
