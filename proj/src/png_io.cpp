#include "antcensus/png_io.hpp"

#include "antcensus/errors.hpp"

#include <cstdio>
#include <memory>
#include <stdexcept>

#include <png.h>

namespace antcensus {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

} // namespace

ImageRgb8 read_png_rgb8(const std::filesystem::path& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw DataError("cannot open image: " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DataError("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DataError("libpng init failed");
    }

    std::vector<png_bytep> row_ptrs;
    ImageRgb8 image;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("not a decodable PNG: " + path.string());
    }

    png_init_io(png, file.get());
    png_read_info(png, info);

    // Normalize every input layout to 8-bit RGB.
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    image.width = static_cast<int>(png_get_image_width(png, info));
    image.height = static_cast<int>(png_get_image_height(png, info));
    if (png_get_rowbytes(png, info) != static_cast<std::size_t>(image.width) * 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("unexpected PNG row layout: " + path.string());
    }

    image.pixels.resize(static_cast<std::size_t>(image.width) * image.height);
    row_ptrs.resize(static_cast<std::size_t>(image.height));
    for (int y = 0; y < image.height; ++y) {
        row_ptrs[static_cast<std::size_t>(y)] =
            reinterpret_cast<png_bytep>(image.pixels.data() + static_cast<std::size_t>(y) * image.width);
    }
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return image;
}

void write_png_rgb8(const std::filesystem::path& path, const ImageRgb8& image) {
    if (image.width < 1 || image.height < 1 ||
        image.pixels.size() != static_cast<std::size_t>(image.width) * image.height) {
        throw std::invalid_argument("write_png_rgb8: inconsistent raster");
    }
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw DataError("cannot open file for writing: " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DataError("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw DataError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DataError("PNG write failed: " + path.string());
    }

    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
                 static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < image.height; ++y) {
        png_write_row(png, reinterpret_cast<png_const_bytep>(
                               image.pixels.data() + static_cast<std::size_t>(y) * image.width));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

ImageRgb8 crop(const ImageRgb8& image, int x, int y, int w, int h) {
    if (w < 1 || h < 1 || x < 0 || y < 0 || x + w > image.width || y + h > image.height) {
        throw std::invalid_argument("crop rectangle leaves the image");
    }
    ImageRgb8 out;
    out.width = w;
    out.height = h;
    out.pixels.resize(static_cast<std::size_t>(w) * h);
    for (int row = 0; row < h; ++row) {
        const Rgb8* src = image.pixels.data() + static_cast<std::size_t>(y + row) * image.width + x;
        std::copy(src, src + w, out.pixels.data() + static_cast<std::size_t>(row) * w);
    }
    return out;
}

} // namespace antcensus
