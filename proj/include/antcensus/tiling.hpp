#pragma once

#include "antcensus/geometry.hpp"

#include <string>
#include <vector>

namespace antcensus {

/// One rectangle of a cols x rows grid, in image pixel coordinates.
struct Tile {
    int col = 0;
    int row = 0;
    int x_offset = 0;
    int y_offset = 0;
    int width = 0;
    int height = 0;

    bool operator==(const Tile&) const = default;
};

/// Row-major tile list covering an image exactly (overlap 0 partitions it).
struct TileGrid {
    ImageSize image_size;
    int cols = 1;
    int rows = 1;
    double overlap_fraction = 0.0;
    std::vector<Tile> tiles;
};

/// Plans a cols x rows grid. Base tile size is floor(W/cols) x floor(H/rows);
/// the last column/row absorbs the remainder so coverage is exact. With
/// overlap_fraction > 0 each tile grows by that fraction of the base size on
/// interior edges, clamped to the image. Throws std::invalid_argument on bad
/// arguments (cols/rows < 1, overlap outside [0,0.5), grid finer than pixels).
TileGrid plan_grid(ImageSize size, int cols, int rows, double overlap_fraction = 0.0);

/// Canonical per-tile identifier: `<image_id>__r<row>c<col>`. Used for crop
/// filenames, per-tile label files, and replay lookups.
std::string tile_id(const std::string& image_id, const Tile& tile);

/// Intersects each box with the tile; a box is kept iff the intersection
/// covers at least min_visibility of its area, clipped to the intersection,
/// and translated into tile-local coordinates.
std::vector<PixelBox> slice_boxes(const std::vector<PixelBox>& boxes, const Tile& tile,
                                  double min_visibility = 0.3);

/// Translates a tile-local detection back into image coordinates.
PixelBox to_global(const PixelBox& det, const Tile& tile);

/// Greedy non-maximum suppression over one image's detections: candidates are
/// visited by confidence descending (ties by cx then cy ascending) and kept
/// iff their IoU with every kept box is below merge_iou. The result preserves
/// that order, so it is sorted by confidence descending.
std::vector<PixelBox> merge(std::vector<PixelBox> dets, double merge_iou = 0.5);

/// Tile manifest CSV row (`tile_id,image_id,col,row,x_offset,y_offset,width,height`).
struct TileManifestRow {
    std::string tile_id;
    std::string image_id;
    Tile tile;
};

std::string write_tile_manifest(const std::vector<TileManifestRow>& rows);
std::vector<TileManifestRow> parse_tile_manifest(const std::string& text);

} // namespace antcensus
