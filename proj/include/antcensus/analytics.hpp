#pragma once

#include "antcensus/geometry.hpp"

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace antcensus {

/// Bait-separating line y = a*x + b in image pixel coordinates. Points are
/// classified by the sign of y - a*x - b.
struct LineSeparator {
    double a = 0.0; // slope
    double b = 0.0; // intercept, image y-units
};

/// Vertical separators cannot be written as y = a*x + b; they classify by
/// x >= x0 instead.
struct VerticalLine {
    double x = 0.0;
};

using Separator = std::variant<LineSeparator, VerticalLine>;

enum class Side { positive, negative };

/// Sign of y - a*x - b. Points exactly on the line count as positive.
Side line_side(double x, double y, const LineSeparator& line);

/// Side under either separator kind (vertical: positive iff x >= x0).
Side side_of(double x, double y, const Separator& separator);

/// Partitions detections by the side of their center point.
/// Returns (positive count, negative count).
std::pair<long, long> split_counts(const std::vector<PixelBox>& dets, const Separator& separator);

/// One timestamped count record. t is elapsed hours; side counts are present
/// only when a separator was configured, and then always sum to total.
struct SeriesRow {
    std::string image_id; // empty for binned rows (they aggregate images)
    double t = 0.0;
    long total = 0;
    std::optional<long> side_positive;
    std::optional<long> side_negative;

    bool operator==(const SeriesRow&) const = default;
};

/// Time manifest: CSV `image_id,timestamp`. Timestamps are either plain reals
/// (elapsed hours, taken verbatim) or ISO-8601 instants (converted to hours
/// elapsed since the earliest one); the mode is auto-detected from the first
/// data row and must be uniform for the file.
std::vector<std::pair<std::string, double>> parse_time_manifest(const std::string& text);

/// Builds the count series: one row per manifest entry (images without
/// detections count 0), sorted by t then image_id. With bin_width_hours the
/// rows are summed per bin; bins are anchored at the minimum t, and each
/// output row carries the bin start. Detections keyed by an image_id missing
/// from the manifest are an error.
std::vector<SeriesRow> build_timeseries(const std::map<std::string, std::vector<PixelBox>>& per_image_dets,
                                        const std::vector<std::pair<std::string, double>>& manifest,
                                        const std::optional<Separator>& separator = std::nullopt,
                                        std::optional<double> bin_width_hours = std::nullopt);

/// Series CSV with header `image_id,t,total,side_positive,side_negative`;
/// side columns are empty without a separator. t uses shortest round-trip
/// formatting, so parse_series_csv reproduces the rows exactly.
std::string export_series_csv(const std::vector<SeriesRow>& rows);
std::vector<SeriesRow> parse_series_csv(const std::string& text);

/// Minimal SVG line plot: one polyline for the total and one per side when
/// side counts are present.
std::string render_series_svg(const std::vector<SeriesRow>& rows, int width = 800, int height = 400);

} // namespace antcensus
