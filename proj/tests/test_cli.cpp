#include "antcensus/cli.hpp"

#include "antcensus/analytics.hpp"
#include "antcensus/annotation_io.hpp"
#include "antcensus/heatmap.hpp"
#include "antcensus/png_io.hpp"
#include "antcensus/tiling.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <fstream>

using namespace antcensus;
using testutil::lattice_boxes;
using testutil::TempDir;

namespace {

int run(std::initializer_list<std::string> args) { return run_cli(std::vector<std::string>(args)); }

std::string slurp(const std::filesystem::path& path) { return read_text_file(path); }

void write_label_dir(const std::filesystem::path& dir, const std::string& id,
                     const std::vector<PixelBox>& boxes, ImageSize frame, bool with_conf) {
    std::filesystem::create_directories(dir);
    std::vector<AnnotationRecord> records;
    for (const auto& box : boxes) records.push_back(normalize(box, frame));
    write_text_file(dir / (id + ".txt"), write_label_text(records, with_conf));
}

} // namespace

TEST_CASE("cli rejects unknown flags, bad values, and missing subcommands") {
    CHECK(run({}) == 1);
    CHECK(run({"no-such-command"}) == 1);
    CHECK(run({"eval", "--bogus-flag", "x"}) == 1);
    CHECK(run({"eval", "--pred", "a", "--gt", "b", "--sizes", "c", "--out", "-", "--iou", "1.5"}) == 1);
    CHECK(run({"sample-plan", "--pool", "0", "--n", "5", "--replicates", "1", "--seed", "1",
               "--out", "-"}) == 1);
    CHECK(run({"--help"}) == 0);
}

TEST_CASE("cli slice-labels / detect / merge / eval pipeline closes at perfect scores") {
    TempDir dir("pipeline");
    const ImageSize frame{818, 545};
    std::mt19937_64 rng(73);
    // 6x4 lattice on a 2x2 grid: tile boundaries align with lattice cell
    // edges, so no ground-truth box straddles a tile
    const auto boxes = lattice_boxes(rng, frame, 6, 4, 12.0);

    const auto gt_dir = dir / "gt";
    write_label_dir(gt_dir, "scene", boxes, frame, false);
    std::map<std::string, ImageSize> sizes{{"scene", frame}};
    write_text_file(dir / "sizes.csv", write_size_manifest(sizes));

    // slice the labels onto a 2x2 grid
    const auto tiles_dir = dir / "tiles";
    CHECK(run({"slice-labels", "--labels", gt_dir.string(), "--sizes", (dir / "sizes.csv").string(),
               "--cols", "2", "--rows", "2", "--out", tiles_dir.string()}) == 0);
    CHECK(std::filesystem::exists(tiles_dir / "scene__r0c0.txt"));
    CHECK(std::filesystem::exists(tiles_dir / "tile_manifest.csv"));
    CHECK(std::filesystem::exists(tiles_dir / "sizes.csv"));

    // replay-detect per tile (treating each tile as its own image)
    const auto tile_dets = dir / "tile_dets";
    CHECK(run({"detect", "--backend", "replay", "--replay", tiles_dir.string(), "--sizes",
               (tiles_dir / "sizes.csv").string(), "--out", tile_dets.string()}) == 0);

    // merge tiles back into full-image detections
    const auto merged = dir / "merged";
    CHECK(run({"merge", "--dets", tile_dets.string(), "--manifest",
               (tiles_dir / "tile_manifest.csv").string(), "--out", merged.string()}) == 0);
    CHECK(std::filesystem::exists(merged / "scene.txt"));

    // evaluating the merged detections against the original labels is perfect
    const auto report = dir / "report.csv";
    CHECK(run({"eval", "--pred", merged.string(), "--gt", gt_dir.string(), "--sizes",
               (dir / "sizes.csv").string(), "--out", report.string()}) == 0);
    const std::string csv = slurp(report);
    CHECK(csv.find("scene,24,0,0,1.000000,1.000000") != std::string::npos);
    CHECK(csv.find("TOTAL,24,0,0,1.000000,1.000000") != std::string::npos);
}

TEST_CASE("cli detect with a replay grid equals direct replay") {
    TempDir dir("grid");
    const ImageSize frame{400, 300};
    std::mt19937_64 rng(79);
    const auto boxes = lattice_boxes(rng, frame, 4, 3, 10.0);

    const auto gt_dir = dir / "gt";
    write_label_dir(gt_dir, "img", boxes, frame, false);
    write_text_file(dir / "sizes.csv", write_size_manifest({{"img", frame}}));

    const auto tiles_dir = dir / "tiles";
    REQUIRE(run({"slice-labels", "--labels", gt_dir.string(), "--sizes", (dir / "sizes.csv").string(),
                 "--cols", "2", "--rows", "3", "--out", tiles_dir.string()}) == 0);

    // the sliced pipeline in one call: per-tile replay + remap + merge
    const auto out_dir = dir / "dets";
    CHECK(run({"detect", "--backend", "replay", "--replay", tiles_dir.string(), "--sizes",
               (dir / "sizes.csv").string(), "--cols", "2", "--rows", "3", "--merge-iou", "0.5",
               "--out", out_dir.string()}) == 0);

    const auto report = dir / "report.csv";
    CHECK(run({"eval", "--pred", out_dir.string(), "--gt", gt_dir.string(), "--sizes",
               (dir / "sizes.csv").string(), "--out", report.string()}) == 0);
    CHECK(slurp(report).find("TOTAL,12,0,0,1.000000,1.000000") != std::string::npos);
}

TEST_CASE("cli slice crops PNG images and writes the manifest") {
    TempDir dir("slice");
    const auto images = dir / "images";
    std::filesystem::create_directories(images);

    ImageRgb8 img;
    img.width = 64;
    img.height = 48;
    img.pixels.resize(64 * 48);
    for (int y = 0; y < 48; ++y) {
        for (int x = 0; x < 64; ++x) {
            img.at(x, y) = Rgb8{static_cast<std::uint8_t>(x * 4), static_cast<std::uint8_t>(y * 5), 7};
        }
    }
    write_png_rgb8(images / "pic.png", img);

    const auto out_dir = dir / "tiles";
    CHECK(run({"slice", "--images", images.string(), "--cols", "2", "--rows", "2", "--out",
               out_dir.string()}) == 0);

    const auto manifest = parse_tile_manifest(slurp(out_dir / "tile_manifest.csv"));
    REQUIRE(manifest.size() == 4);
    CHECK(manifest[0].tile_id == "pic__r0c0");
    CHECK(manifest[3].tile.x_offset == 32);
    CHECK(manifest[3].tile.y_offset == 24);

    const ImageRgb8 tile = read_png_rgb8(out_dir / "pic__r1c1.png");
    CHECK(tile.width == 32);
    CHECK(tile.height == 24);
    CHECK(tile.at(0, 0) == img.at(32, 24)); // crop offsets line up

    // JPEG inputs are a data error for slicing
    write_text_file(images / "photo.jpg", "pretend jpeg");
    CHECK(run({"slice", "--images", images.string(), "--cols", "2", "--rows", "2", "--out",
               out_dir.string()}) == 2);
}

TEST_CASE("cli slice at full capture resolution matches the 4x10 patch table") {
    TempDir dir("slice_full");
    const auto images = dir / "images";
    std::filesystem::create_directories(images);

    ImageRgb8 img;
    img.width = 1636;
    img.height = 2180;
    img.pixels.assign(static_cast<std::size_t>(1636) * 2180, Rgb8{30, 30, 30});
    write_png_rgb8(images / "colony.png", img);

    const auto out_dir = dir / "tiles";
    CHECK(run({"slice", "--images", images.string(), "--cols", "4", "--rows", "10", "--out",
               out_dir.string()}) == 0);

    const auto manifest = parse_tile_manifest(read_text_file(out_dir / "tile_manifest.csv"));
    REQUIRE(manifest.size() == 40);
    for (const auto& row : manifest) {
        CHECK(row.tile.width == 409);
        CHECK(row.tile.height == 218);
    }
    const ImageRgb8 tile = read_png_rgb8(out_dir / "colony__r9c3.png");
    CHECK(tile.width == 409);
    CHECK(tile.height == 218);
}

TEST_CASE("cli synthetic detect, agree, heatmap, timeseries, and sample-plan") {
    TempDir dir("rest");
    const ImageSize frame{500, 500};
    std::mt19937_64 rng(83);

    const auto gt_dir = dir / "gt";
    std::map<std::string, ImageSize> sizes;
    std::vector<std::pair<std::string, double>> times;
    for (int i = 0; i < 3; ++i) {
        const std::string id = "img" + std::to_string(i);
        write_label_dir(gt_dir, id, lattice_boxes(rng, frame, 3 + i, 3, 10.0), frame, false);
        sizes[id] = frame;
        times.emplace_back(id, static_cast<double>(i));
    }
    write_text_file(dir / "sizes.csv", write_size_manifest(sizes));

    // synthetic detect requires a seed
    const auto det_dir = dir / "dets";
    CHECK(run({"detect", "--backend", "synthetic", "--labels", gt_dir.string(), "--sizes",
               (dir / "sizes.csv").string(), "--out", det_dir.string()}) == 1);
    CHECK(run({"detect", "--backend", "synthetic", "--labels", gt_dir.string(), "--sizes",
               (dir / "sizes.csv").string(), "--seed", "9", "--out", det_dir.string()}) == 0);
    CHECK(std::filesystem::exists(det_dir / "img0.txt"));

    // determinism: rerunning with the same seed reproduces bytes
    const std::string first = slurp(det_dir / "img0.txt");
    CHECK(run({"detect", "--backend", "synthetic", "--labels", gt_dir.string(), "--sizes",
               (dir / "sizes.csv").string(), "--seed", "9", "--out", det_dir.string()}) == 0);
    CHECK(slurp(det_dir / "img0.txt") == first);

    // agree on identical counts: r^2 = 1, rmse = 0
    std::string counts = "image_id,count\nimg0,9\nimg1,12\nimg2,15\n";
    write_text_file(dir / "manual.csv", counts);
    write_text_file(dir / "auto.csv", counts);
    const auto agree_out = dir / "agree.csv";
    CHECK(run({"agree", "--manual", (dir / "manual.csv").string(), "--auto",
               (dir / "auto.csv").string(), "--out", agree_out.string()}) == 0);
    CHECK(slurp(agree_out) == "n,r_squared,rmse\n3,1,0\n");

    // count mismatch between files is a data error
    write_text_file(dir / "short.csv", "image_id,count\nimg0,9\n");
    CHECK(run({"agree", "--manual", (dir / "manual.csv").string(), "--auto",
               (dir / "short.csv").string(), "--out", "-"}) == 2);

    // heatmap over the ground-truth labels
    const auto heat_png = dir / "heat.png";
    const auto heat_csv = dir / "heat.csv";
    CHECK(run({"heatmap", "--dets", gt_dir.string(), "--sizes", (dir / "sizes.csv").string(),
               "--grid", "200", "--out", heat_png.string(), "--raw", heat_csv.string()}) == 0);
    const ImageRgb8 heat = read_png_rgb8(heat_png);
    CHECK(heat.width == 200);
    CHECK(heat.height == 200);
    CHECK(std::filesystem::exists(heat_csv));

    // timeseries without and with a separating line
    write_text_file(dir / "times.csv", "image_id,timestamp\nimg0,0\nimg1,1\nimg2,2\n");
    const auto series = dir / "series.csv";
    CHECK(run({"timeseries", "--dets", gt_dir.string(), "--times", (dir / "times.csv").string(),
               "--out", series.string()}) == 0);
    const auto rows = parse_series_csv(slurp(series));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].total == 9);
    CHECK(rows[1].total == 12);
    CHECK(rows[2].total == 15);

    // a line without sizes is a usage error
    CHECK(run({"timeseries", "--dets", gt_dir.string(), "--times", (dir / "times.csv").string(),
               "--line", "0,250", "--out", "-"}) == 1);

    const auto series_split = dir / "series_split.csv";
    const auto plot = dir / "series.svg";
    CHECK(run({"timeseries", "--dets", gt_dir.string(), "--times", (dir / "times.csv").string(),
               "--sizes", (dir / "sizes.csv").string(), "--line", "0,250", "--bin", "2", "--out",
               series_split.string(), "--plot", plot.string()}) == 0);
    const auto split_rows = parse_series_csv(slurp(series_split));
    REQUIRE(split_rows.size() == 2);
    CHECK(split_rows[0].total == 21);
    CHECK(*split_rows[0].side_positive + *split_rows[0].side_negative == 21);
    CHECK(slurp(plot).find("<svg") != std::string::npos);

    // sample-plan determinism, bytewise
    const auto plan_a = dir / "plan_a.csv";
    const auto plan_b = dir / "plan_b.csv";
    CHECK(run({"sample-plan", "--pool", "954", "--n", "64", "--replicates", "3", "--seed", "21",
               "--out", plan_a.string()}) == 0);
    CHECK(run({"sample-plan", "--pool", "954", "--n", "64", "--replicates", "3", "--seed", "21",
               "--out", plan_b.string()}) == 0);
    CHECK(slurp(plan_a) == slurp(plan_b));
    CHECK(slurp(plan_a).rfind("replicate,position,index\n", 0) == 0);
}

TEST_CASE("cli external backend failures exit 3") {
    TempDir dir("external_cli");
    const auto images = dir / "images";
    std::filesystem::create_directories(images);
    ImageRgb8 img;
    img.width = 10;
    img.height = 10;
    img.pixels.assign(100, Rgb8{1, 2, 3});
    write_png_rgb8(images / "img.png", img);

    const auto broken = dir / "broken.sh";
    write_text_file(broken, "#!/bin/sh\nexit 9\n");
    std::filesystem::permissions(broken, std::filesystem::perms::owner_all);

    CHECK(run({"detect", "--backend", "external", "--command", broken.string(), "--images",
               images.string(), "--out", (dir / "out").string()}) == 3);
}
