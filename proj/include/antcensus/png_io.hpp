#pragma once

#include "antcensus/heatmap.hpp"

#include <filesystem>
#include <vector>

namespace antcensus {

/// 8-bit RGB raster, row-major.
struct ImageRgb8 {
    int width = 0;
    int height = 0;
    std::vector<Rgb8> pixels;

    Rgb8& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    const Rgb8& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Decodes a PNG to RGB8 (palette/gray/alpha inputs are expanded).
/// Throws DataError on unreadable or non-PNG files.
ImageRgb8 read_png_rgb8(const std::filesystem::path& path);

/// Writes an RGB8 raster as a PNG. Throws DataError on failure.
void write_png_rgb8(const std::filesystem::path& path, const ImageRgb8& image);

/// Copies the rectangle (x, y, w, h) out of an image. Throws
/// std::invalid_argument when the rectangle leaves the image.
ImageRgb8 crop(const ImageRgb8& image, int x, int y, int w, int h);

} // namespace antcensus
