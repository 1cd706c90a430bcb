#include "antcensus/analytics.hpp"

#include "antcensus/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <string_view>

namespace antcensus {

Side line_side(double x, double y, const LineSeparator& line) {
    const double value = y - line.a * x - line.b;
    return value >= 0.0 ? Side::positive : Side::negative; // on-line points count positive
}

Side side_of(double x, double y, const Separator& separator) {
    if (const auto* line = std::get_if<LineSeparator>(&separator)) return line_side(x, y, *line);
    return x >= std::get<VerticalLine>(separator).x ? Side::positive : Side::negative;
}

std::pair<long, long> split_counts(const std::vector<PixelBox>& dets, const Separator& separator) {
    long positive = 0, negative = 0;
    for (const auto& det : dets) {
        (side_of(det.cx, det.cy, separator) == Side::positive ? positive : negative) += 1;
    }
    return {positive, negative};
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    while (true) {
        const auto comma = line.find(',');
        fields.push_back(line.substr(0, comma));
        if (comma == std::string_view::npos) break;
        line.remove_prefix(comma + 1);
    }
    return fields;
}

std::optional<double> try_parse_double(std::string_view field) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) return std::nullopt;
    return value;
}

// Hinnant's civil-days algorithm: days since 1970-01-01 for a proleptic
// Gregorian date.
long long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
                         static_cast<unsigned>(d) - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<long long>(era) * 146097 + static_cast<long long>(doe) - 719468;
}

// Parses `YYYY-MM-DDTHH:MM:SS[.frac][Z]` (space accepted for 'T') into epoch
// seconds. Returns nullopt when the text is not such an instant.
std::optional<double> parse_iso8601(std::string_view text) {
    auto digits = [&](std::size_t pos, std::size_t count, int& out) {
        if (pos + count > text.size()) return false;
        int value = 0;
        for (std::size_t i = pos; i < pos + count; ++i) {
            const char c = text[i];
            if (c < '0' || c > '9') return false;
            value = value * 10 + (c - '0');
        }
        out = value;
        return true;
    };

    int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
    if (!digits(0, 4, year) || text.size() < 19) return std::nullopt;
    if (text[4] != '-' || !digits(5, 2, month) || text[7] != '-' || !digits(8, 2, day)) {
        return std::nullopt;
    }
    if (text[10] != 'T' && text[10] != ' ') return std::nullopt;
    if (!digits(11, 2, hour) || text[13] != ':' || !digits(14, 2, minute) || text[16] != ':' ||
        !digits(17, 2, second)) {
        return std::nullopt;
    }
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60) {
        return std::nullopt;
    }

    double frac = 0.0;
    std::size_t pos = 19;
    if (pos < text.size() && text[pos] == '.') {
        const std::size_t start = ++pos;
        double scale = 0.1;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            frac += (text[pos] - '0') * scale;
            scale *= 0.1;
            ++pos;
        }
        if (pos == start) return std::nullopt;
    }
    if (pos < text.size() && (text[pos] == 'Z' || text[pos] == 'z')) ++pos;
    if (pos != text.size()) return std::nullopt;

    const double secs = static_cast<double>(days_from_civil(year, month, day)) * 86400.0 +
                        hour * 3600.0 + minute * 60.0 + second + frac;
    return secs;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace

std::vector<std::pair<std::string, double>> parse_time_manifest(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    enum class Mode { undecided, hours, iso } mode = Mode::undecided;

    std::vector<std::pair<std::string, double>> raw;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "image_id,timestamp") {
                throw ParseError("time manifest must start with header 'image_id,timestamp'", 1);
            }
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError("expected 'image_id,timestamp'", line_no);
        std::string id = line.substr(0, comma);
        const std::string_view stamp = std::string_view(line).substr(comma + 1);
        if (id.empty()) throw ParseError("empty image_id", line_no);
        if (!seen.insert(id).second) throw ParseError("duplicate image_id '" + id + "'", line_no);

        if (mode == Mode::undecided) mode = try_parse_double(stamp) ? Mode::hours : Mode::iso;
        double value = 0.0;
        if (mode == Mode::hours) {
            const auto hours = try_parse_double(stamp);
            if (!hours) {
                throw ParseError("timestamp '" + std::string(stamp) +
                                     "' is not a real number of hours (file started numeric)",
                                 line_no);
            }
            value = *hours;
        } else {
            const auto secs = parse_iso8601(stamp);
            if (!secs) {
                throw ParseError("timestamp '" + std::string(stamp) + "' is not ISO-8601", line_no);
            }
            value = *secs;
        }
        raw.emplace_back(std::move(id), value);
    }

    if (mode == Mode::iso && !raw.empty()) {
        double min_secs = raw.front().second;
        for (const auto& [id, secs] : raw) min_secs = std::min(min_secs, secs);
        for (auto& [id, secs] : raw) secs = (secs - min_secs) / 3600.0;
    }
    return raw;
}

std::vector<SeriesRow> build_timeseries(const std::map<std::string, std::vector<PixelBox>>& per_image_dets,
                                        const std::vector<std::pair<std::string, double>>& manifest,
                                        const std::optional<Separator>& separator,
                                        std::optional<double> bin_width_hours) {
    std::set<std::string> manifest_ids;
    for (const auto& [id, t] : manifest) manifest_ids.insert(id);
    for (const auto& [id, dets] : per_image_dets) {
        if (!manifest_ids.count(id)) {
            throw DataError("detections for image '" + id + "' have no time manifest entry");
        }
    }
    if (bin_width_hours && !(*bin_width_hours > 0.0)) {
        throw std::invalid_argument("bin width must be positive");
    }

    std::vector<SeriesRow> rows;
    rows.reserve(manifest.size());
    for (const auto& [id, t] : manifest) {
        SeriesRow row;
        row.image_id = id;
        row.t = t;
        const auto it = per_image_dets.find(id);
        const std::vector<PixelBox> empty;
        const auto& dets = it == per_image_dets.end() ? empty : it->second;
        row.total = static_cast<long>(dets.size());
        if (separator) {
            const auto [pos, neg] = split_counts(dets, *separator);
            row.side_positive = pos;
            row.side_negative = neg;
        }
        rows.push_back(std::move(row));
    }

    std::sort(rows.begin(), rows.end(), [](const SeriesRow& a, const SeriesRow& b) {
        if (a.t != b.t) return a.t < b.t;
        return a.image_id < b.image_id;
    });

    if (!bin_width_hours || rows.empty()) return rows;

    const double t0 = rows.front().t;
    const double width = *bin_width_hours;
    std::vector<SeriesRow> binned;
    for (const auto& row : rows) {
        const auto k = static_cast<long long>(std::floor((row.t - t0) / width));
        const double bin_start = t0 + static_cast<double>(k) * width;
        if (binned.empty() || binned.back().t != bin_start) {
            SeriesRow bin;
            bin.t = bin_start;
            if (separator) {
                bin.side_positive = 0;
                bin.side_negative = 0;
            }
            binned.push_back(std::move(bin));
        }
        SeriesRow& bin = binned.back();
        bin.total += row.total;
        if (separator) {
            *bin.side_positive += *row.side_positive;
            *bin.side_negative += *row.side_negative;
        }
    }
    return binned;
}

std::string export_series_csv(const std::vector<SeriesRow>& rows) {
    std::string out = "image_id,t,total,side_positive,side_negative\n";
    for (const auto& row : rows) {
        out += row.image_id;
        out += ',';
        out += format_double(row.t);
        out += ',';
        out += std::to_string(row.total);
        out += ',';
        if (row.side_positive) out += std::to_string(*row.side_positive);
        out += ',';
        if (row.side_negative) out += std::to_string(*row.side_negative);
        out += '\n';
    }
    return out;
}

std::vector<SeriesRow> parse_series_csv(const std::string& text) {
    std::vector<SeriesRow> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "image_id,t,total,side_positive,side_negative") {
                throw ParseError("series CSV header mismatch", 1);
            }
            continue;
        }
        const auto fields = split_csv(line);
        if (fields.size() != 5) throw ParseError("expected 5 comma-separated fields", line_no);

        SeriesRow row;
        row.image_id = std::string(fields[0]);
        const auto t = try_parse_double(fields[1]);
        if (!t) throw ParseError("bad t value '" + std::string(fields[1]) + "'", line_no);
        row.t = *t;
        const auto total = try_parse_double(fields[2]);
        if (!total) throw ParseError("bad total value '" + std::string(fields[2]) + "'", line_no);
        row.total = static_cast<long>(*total);
        if (!fields[3].empty()) {
            const auto v = try_parse_double(fields[3]);
            if (!v) throw ParseError("bad side_positive value", line_no);
            row.side_positive = static_cast<long>(*v);
        }
        if (!fields[4].empty()) {
            const auto v = try_parse_double(fields[4]);
            if (!v) throw ParseError("bad side_negative value", line_no);
            row.side_negative = static_cast<long>(*v);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string render_series_svg(const std::vector<SeriesRow>& rows, int width, int height) {
    const int margin = 45;
    const double plot_w = std::max(width - 2 * margin, 1);
    const double plot_h = std::max(height - 2 * margin, 1);

    double t_min = 0.0, t_max = 1.0;
    long y_max = 1;
    if (!rows.empty()) {
        t_min = rows.front().t;
        t_max = rows.back().t;
        for (const auto& row : rows) {
            y_max = std::max(y_max, row.total);
            if (row.side_positive) y_max = std::max(y_max, *row.side_positive);
            if (row.side_negative) y_max = std::max(y_max, *row.side_negative);
        }
    }
    const double t_span = t_max > t_min ? t_max - t_min : 1.0;

    auto px = [&](double t) { return margin + (t - t_min) / t_span * plot_w; };
    auto py = [&](double v) { return margin + plot_h - v / static_cast<double>(y_max) * plot_h; };

    auto polyline = [&](const char* color, auto value_of) {
        std::string points;
        char buf[64];
        for (const auto& row : rows) {
            const auto value = value_of(row);
            if (!value) continue;
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(row.t), py(static_cast<double>(*value)));
            points += buf;
        }
        if (points.empty()) return std::string();
        if (!points.empty() && points.back() == ' ') points.pop_back();
        return "  <polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    };

    std::string svg;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                  "viewBox=\"0 0 %d %d\">\n",
                  width, height, width, height);
    svg += buf;
    svg += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "  <line x1=\"%d\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n", margin,
                  margin + plot_h, margin + plot_w, margin + plot_h);
    svg += buf;
    std::snprintf(buf, sizeof buf,
                  "  <line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%.2f\" stroke=\"black\"/>\n", margin,
                  margin, margin, margin + plot_h);
    svg += buf;

    svg += polyline("#1a1a1a", [](const SeriesRow& r) { return std::optional<long>(r.total); });
    svg += polyline("#d95f02", [](const SeriesRow& r) { return r.side_positive; });
    svg += polyline("#1b9e77", [](const SeriesRow& r) { return r.side_negative; });

    std::snprintf(buf, sizeof buf,
                  "  <text x=\"%d\" y=\"%.2f\" font-size=\"11\" font-family=\"sans-serif\">%s h</text>\n",
                  margin, margin + plot_h + 16, format_double(t_min).c_str());
    svg += buf;
    std::snprintf(buf, sizeof buf,
                  "  <text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" font-family=\"sans-serif\" "
                  "text-anchor=\"end\">%s h</text>\n",
                  margin + plot_w, margin + plot_h + 16, format_double(t_max).c_str());
    svg += buf;
    std::snprintf(buf, sizeof buf,
                  "  <text x=\"%d\" y=\"%d\" font-size=\"11\" font-family=\"sans-serif\">%ld</text>\n",
                  4, margin + 4, y_max);
    svg += buf;
    svg += "</svg>\n";
    return svg;
}

} // namespace antcensus
