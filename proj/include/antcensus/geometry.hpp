#pragma once

#include <optional>

namespace antcensus {

/// Pixel dimensions of an image. width/height >= 1 for a valid size.
struct ImageSize {
    int width = 0;
    int height = 0;

    bool valid() const { return width >= 1 && height >= 1; }
    bool operator==(const ImageSize&) const = default;
};

/// Axis-aligned box in pixel coordinates, center format.
/// Origin is the top-left corner, x grows rightward, y grows downward.
struct PixelBox {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0; // > 0
    double h = 0.0; // > 0
    int category_id = 0;
    double confidence = 1.0; // in [0,1]; ground truth uses 1.0

    double left() const { return cx - w / 2.0; }
    double right() const { return cx + w / 2.0; }
    double top() const { return cy - h / 2.0; }
    double bottom() const { return cy + h / 2.0; }
    double area() const { return w * h; }
};

/// Box with all geometry fields normalized to [0,1] (center format).
struct NormBox {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;
    int category_id = 0;
    std::optional<double> confidence; // absent for plain labels
};

/// Circle in pixel coordinates, r > 0.
struct Circle {
    double x0 = 0.0;
    double y0 = 0.0;
    double r = 0.0;
};

/// Intersection over union in corner form; 0 for disjoint boxes.
double iou(const PixelBox& a, const PixelBox& b);

/// Out-of-bounds handling for normalize().
enum class BoundsPolicy {
    strict, // box must lie fully inside the image; throws otherwise
    clamp,  // box is intersected with the image rectangle first
};

/// Divides center/size by image width/height.
/// strict mode throws std::out_of_range when the box sticks out of the image;
/// clamp mode clips it first and throws only if nothing remains inside.
NormBox normalize(const PixelBox& box, ImageSize size, BoundsPolicy policy = BoundsPolicy::strict);

/// Multiplies center/size by image width/height.
PixelBox denormalize(const NormBox& box, ImageSize size);

/// Radius rule for box_to_circle().
enum class RadiusMode {
    mean_extent, // r = (w + h) / 2, the mean of the two side lengths (default)
    half_extent, // r = (w + h) / 4, the mean of the two half-extents
};

Circle box_to_circle(const PixelBox& box, RadiusMode mode = RadiusMode::mean_extent);

/// Height divided by width.
double aspect_ratio(ImageSize size);

} // namespace antcensus
