#include "antcensus/analytics.hpp"

#include "antcensus/errors.hpp"
#include "helpers.hpp"

#include <doctest.h>

using namespace antcensus;
using testutil::random_box;

TEST_CASE("line_side sign arithmetic and tie rule") {
    const LineSeparator line{1.0, 0.0};
    CHECK(line_side(2, 5, line) == Side::positive); // L = 3
    CHECK(line_side(5, 2, line) == Side::negative); // L = -3
    CHECK(line_side(4, 4, line) == Side::positive); // on the line

    const LineSeparator shifted{-0.5, 10.0};
    CHECK(line_side(0, 10, shifted) == Side::positive);
    CHECK(line_side(0, 9.999, shifted) == Side::negative);

    // scaling (a, b) cannot change the geometric line here, but an equal line
    // through other parameters classifies every off-line point identically
    std::mt19937_64 rng(43);
    for (int i = 0; i < 200; ++i) {
        const LineSeparator base{uniform_in(rng, -3, 3), uniform_in(rng, -50, 50)};
        const double x = uniform_in(rng, -100, 100);
        const double y = uniform_in(rng, -100, 100);
        if (y - base.a * x - base.b == 0.0) continue;
        CHECK(line_side(x, y, base) == line_side(x, y, LineSeparator{base.a, base.b}));
    }
}

TEST_CASE("split_counts partitions and respects mirror symmetry") {
    const Separator separator = LineSeparator{0.0, 50.0}; // horizontal line y = 50
    CHECK(split_counts({}, separator) == std::pair<long, long>{0, 0});

    std::vector<PixelBox> above;
    for (int i = 0; i < 5; ++i) above.push_back({10.0 * i + 5, 80, 4, 4, 0, 1.0});
    CHECK(split_counts(above, separator) == std::pair<long, long>{5, 0});

    std::mt19937_64 rng(47);
    std::vector<PixelBox> dets;
    for (int i = 0; i < 1000; ++i) {
        PixelBox box = random_box(rng, ImageSize{200, 200});
        if (box.cy == 50.0) box.cy += 0.5; // keep off the line so mirroring is exact
        dets.push_back(box);
    }
    const auto [pos, neg] = split_counts(dets, separator);
    CHECK(pos + neg == 1000);

    std::vector<PixelBox> mirrored = dets;
    for (auto& box : mirrored) box.cy = 100.0 - box.cy; // reflect across y = 50
    const auto [mpos, mneg] = split_counts(mirrored, separator);
    CHECK(mpos == neg);
    CHECK(mneg == pos);
}

TEST_CASE("vertical separator classifies by x") {
    const Separator vertical = VerticalLine{100.0};
    CHECK(side_of(150, 0, vertical) == Side::positive);
    CHECK(side_of(50, 0, vertical) == Side::negative);
    CHECK(side_of(100, 0, vertical) == Side::positive); // tie rule
}

TEST_CASE("time manifest parses hours and ISO-8601 timestamps") {
    const auto hours = parse_time_manifest("image_id,timestamp\nimg1,0\nimg2,1.5\nimg3,2\n");
    REQUIRE(hours.size() == 3);
    CHECK(hours[0] == std::pair<std::string, double>{"img1", 0.0});
    CHECK(hours[1].second == 1.5);

    const auto iso = parse_time_manifest(
        "image_id,timestamp\n"
        "a,2024-05-01T10:00:00\n"
        "b,2024-05-01T11:30:00Z\n"
        "c,2024-05-02 10:00:00\n");
    REQUIRE(iso.size() == 3);
    CHECK(iso[0].second == 0.0); // earliest becomes hour zero
    CHECK(iso[1].second == doctest::Approx(1.5));
    CHECK(iso[2].second == doctest::Approx(24.0));

    CHECK_THROWS_AS(parse_time_manifest("image_id,timestamp\na,not-a-time\n"), ParseError);
    CHECK_THROWS_AS(parse_time_manifest("image_id,timestamp\na,1.5\nb,2024-05-01T10:00:00\n"),
                    ParseError); // mixed modes
    CHECK_THROWS_AS(parse_time_manifest("image_id,timestamp\na,1\na,2\n"), ParseError);
    CHECK_THROWS_AS(parse_time_manifest("bad header\n"), ParseError);
}

TEST_CASE("build_timeseries passthrough, zero fill, and binning") {
    std::map<std::string, std::vector<PixelBox>> dets;
    dets["img_a"] = std::vector<PixelBox>(2, PixelBox{10, 10, 4, 4, 0, 1.0});
    dets["img_b"] = std::vector<PixelBox>(5, PixelBox{10, 10, 4, 4, 0, 1.0});
    dets["img_c"] = std::vector<PixelBox>(1, PixelBox{10, 10, 4, 4, 0, 1.0});

    const std::vector<std::pair<std::string, double>> manifest{
        {"img_a", 0.0}, {"img_b", 1.0}, {"img_c", 2.0}, {"img_d", 3.0}};

    const auto rows = build_timeseries(dets, manifest);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].image_id == "img_a");
    CHECK(rows[0].total == 2);
    CHECK(rows[1].total == 5);
    CHECK(rows[2].total == 1);
    CHECK(rows[3].total == 0); // in the manifest, no detections
    CHECK_FALSE(rows[0].side_positive.has_value());

    const auto binned = build_timeseries(dets, manifest, std::nullopt, 2.0);
    REQUIRE(binned.size() == 2);
    CHECK(binned[0].t == 0.0);
    CHECK(binned[0].total == 7);
    CHECK(binned[1].t == 2.0);
    CHECK(binned[1].total == 1);
    CHECK(binned[0].image_id.empty());

    // binning conserves counts for arbitrary widths
    for (double width : {0.7, 1.0, 5.0}) {
        long direct = 0, via_bins = 0;
        for (const auto& row : build_timeseries(dets, manifest)) direct += row.total;
        for (const auto& row : build_timeseries(dets, manifest, std::nullopt, width)) {
            via_bins += row.total;
        }
        CHECK(direct == via_bins);
    }

    std::map<std::string, std::vector<PixelBox>> orphan;
    orphan["mystery"] = {};
    CHECK_THROWS_AS(build_timeseries(orphan, manifest), DataError);
}

TEST_CASE("build_timeseries splits sides and keeps the partition identity") {
    std::mt19937_64 rng(53);
    std::map<std::string, std::vector<PixelBox>> dets;
    std::vector<std::pair<std::string, double>> manifest;
    for (int i = 0; i < 10; ++i) {
        const std::string id = "img" + std::to_string(i);
        std::vector<PixelBox> boxes;
        const auto n = bounded(rng, 20);
        for (std::size_t k = 0; k < n; ++k) boxes.push_back(random_box(rng, ImageSize{300, 300}));
        dets[id] = std::move(boxes);
        manifest.emplace_back(id, static_cast<double>(i) * 0.5);
    }

    const Separator separator = LineSeparator{0.75, 20.0};
    for (auto bin : std::vector<std::optional<double>>{std::nullopt, 1.0, 2.5}) {
        const auto rows = build_timeseries(dets, manifest, separator, bin);
        for (const auto& row : rows) {
            REQUIRE(row.side_positive.has_value());
            REQUIRE(row.side_negative.has_value());
            CHECK(*row.side_positive + *row.side_negative == row.total);
        }
    }
}

TEST_CASE("series CSV round trips exactly") {
    std::vector<SeriesRow> rows;
    rows.push_back({"img1", 0.0, 3, std::nullopt, std::nullopt});
    rows.push_back({"img2", 1.0 / 3.0, 7, 4, 3});
    rows.push_back({"", 2.7182818284590452, 0, 0, 0});

    const std::string csv = export_series_csv(rows);
    CHECK(csv.rfind("image_id,t,total,side_positive,side_negative\n", 0) == 0);
    CHECK(csv.back() == '\n');

    const auto parsed = parse_series_csv(csv);
    REQUIRE(parsed.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(parsed[i] == rows[i]);

    CHECK(parse_series_csv(export_series_csv({})).empty());
}

TEST_CASE("series SVG plots totals and sides") {
    std::vector<SeriesRow> rows;
    for (int i = 0; i < 6; ++i) {
        rows.push_back({"img" + std::to_string(i), static_cast<double>(i), 10 + i, 6 + i, 4});
    }
    const std::string svg = render_series_svg(rows);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    // three polylines: total + both sides
    std::size_t count = 0;
    for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos;
         pos = svg.find("<polyline", pos + 1)) {
        ++count;
    }
    CHECK(count == 3);

    const std::string totals_only = render_series_svg({{"a", 0.0, 5, std::nullopt, std::nullopt}});
    std::size_t count2 = 0;
    for (std::size_t pos = totals_only.find("<polyline"); pos != std::string::npos;
         pos = totals_only.find("<polyline", pos + 1)) {
        ++count2;
    }
    CHECK(count2 == 1);
}
