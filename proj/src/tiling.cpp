#include "antcensus/tiling.hpp"

#include "antcensus/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string_view>

namespace antcensus {

TileGrid plan_grid(ImageSize size, int cols, int rows, double overlap_fraction) {
    if (!size.valid()) throw std::invalid_argument("image size must be at least 1x1");
    if (cols < 1 || rows < 1) throw std::invalid_argument("cols and rows must be >= 1");
    if (!(overlap_fraction >= 0.0 && overlap_fraction < 0.5)) {
        throw std::invalid_argument("overlap_fraction must be in [0, 0.5)");
    }
    if (cols > size.width || rows > size.height) {
        throw std::invalid_argument("grid " + std::to_string(cols) + "x" + std::to_string(rows) +
                                    " is finer than the image pixels");
    }

    const int base_w = size.width / cols;
    const int base_h = size.height / rows;
    const int grow_x = static_cast<int>(std::lround(overlap_fraction * base_w));
    const int grow_y = static_cast<int>(std::lround(overlap_fraction * base_h));

    TileGrid grid;
    grid.image_size = size;
    grid.cols = cols;
    grid.rows = rows;
    grid.overlap_fraction = overlap_fraction;
    grid.tiles.reserve(static_cast<std::size_t>(cols) * rows);

    for (int r = 0; r < rows; ++r) {
        const int y0 = r * base_h;
        const int h = (r == rows - 1) ? size.height - y0 : base_h;
        for (int c = 0; c < cols; ++c) {
            const int x0 = c * base_w;
            const int w = (c == cols - 1) ? size.width - x0 : base_w;

            Tile tile;
            tile.col = c;
            tile.row = r;
            int left = x0 - (c > 0 ? grow_x : 0);
            int right = x0 + w + (c < cols - 1 ? grow_x : 0);
            int top = y0 - (r > 0 ? grow_y : 0);
            int bottom = y0 + h + (r < rows - 1 ? grow_y : 0);
            left = std::max(left, 0);
            top = std::max(top, 0);
            right = std::min(right, size.width);
            bottom = std::min(bottom, size.height);
            tile.x_offset = left;
            tile.y_offset = top;
            tile.width = right - left;
            tile.height = bottom - top;
            grid.tiles.push_back(tile);
        }
    }
    return grid;
}

std::string tile_id(const std::string& image_id, const Tile& tile) {
    return image_id + "__r" + std::to_string(tile.row) + "c" + std::to_string(tile.col);
}

std::vector<PixelBox> slice_boxes(const std::vector<PixelBox>& boxes, const Tile& tile,
                                  double min_visibility) {
    if (!(min_visibility > 0.0 && min_visibility <= 1.0)) {
        throw std::invalid_argument("min_visibility must be in (0, 1]");
    }
    const double tl = tile.x_offset;
    const double tt = tile.y_offset;
    const double tr = tile.x_offset + tile.width;
    const double tb = tile.y_offset + tile.height;

    std::vector<PixelBox> out;
    for (const auto& box : boxes) {
        const double l = std::max(box.left(), tl);
        const double t = std::max(box.top(), tt);
        const double r = std::min(box.right(), tr);
        const double b = std::min(box.bottom(), tb);
        const double iw = r - l;
        const double ih = b - t;
        if (iw <= 0.0 || ih <= 0.0) continue;
        if (iw * ih < min_visibility * box.area()) continue;

        PixelBox clipped = box;
        if (l > box.left() || t > box.top() || r < box.right() || b < box.bottom()) {
            clipped.cx = (l + r) / 2.0;
            clipped.cy = (t + b) / 2.0;
            clipped.w = iw;
            clipped.h = ih;
        }
        clipped.cx -= tile.x_offset;
        clipped.cy -= tile.y_offset;
        out.push_back(clipped);
    }
    return out;
}

PixelBox to_global(const PixelBox& det, const Tile& tile) {
    PixelBox out = det;
    out.cx += tile.x_offset;
    out.cy += tile.y_offset;
    return out;
}

std::vector<PixelBox> merge(std::vector<PixelBox> dets, double merge_iou) {
    if (!(merge_iou > 0.0 && merge_iou <= 1.0)) {
        throw std::invalid_argument("merge_iou must be in (0, 1]");
    }
    std::sort(dets.begin(), dets.end(), [](const PixelBox& a, const PixelBox& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.cx != b.cx) return a.cx < b.cx;
        return a.cy < b.cy;
    });

    std::vector<PixelBox> kept;
    for (const auto& cand : dets) {
        bool suppressed = false;
        for (const auto& k : kept) {
            if (iou(cand, k) >= merge_iou) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(cand);
    }
    return kept;
}

std::string write_tile_manifest(const std::vector<TileManifestRow>& rows) {
    std::string out = "tile_id,image_id,col,row,x_offset,y_offset,width,height\n";
    for (const auto& row : rows) {
        out += row.tile_id + ',' + row.image_id + ',' + std::to_string(row.tile.col) + ',' +
               std::to_string(row.tile.row) + ',' + std::to_string(row.tile.x_offset) + ',' +
               std::to_string(row.tile.y_offset) + ',' + std::to_string(row.tile.width) + ',' +
               std::to_string(row.tile.height) + '\n';
    }
    return out;
}

namespace {

int parse_manifest_int(std::string_view field, std::size_t line_no) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError("expected an integer, got '" + std::string(field) + "'", line_no);
    }
    return value;
}

} // namespace

std::vector<TileManifestRow> parse_tile_manifest(const std::string& text) {
    std::vector<TileManifestRow> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "tile_id,image_id,col,row,x_offset,y_offset,width,height") {
                throw ParseError("tile manifest header mismatch", 1);
            }
            continue;
        }
        std::vector<std::string_view> fields;
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            fields.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (fields.size() != 8) throw ParseError("expected 8 comma-separated fields", line_no);

        TileManifestRow row;
        row.tile_id = std::string(fields[0]);
        row.image_id = std::string(fields[1]);
        row.tile.col = parse_manifest_int(fields[2], line_no);
        row.tile.row = parse_manifest_int(fields[3], line_no);
        row.tile.x_offset = parse_manifest_int(fields[4], line_no);
        row.tile.y_offset = parse_manifest_int(fields[5], line_no);
        row.tile.width = parse_manifest_int(fields[6], line_no);
        row.tile.height = parse_manifest_int(fields[7], line_no);
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace antcensus
