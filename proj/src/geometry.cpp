#include "antcensus/geometry.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace antcensus {

double iou(const PixelBox& a, const PixelBox& b) {
    const double iw = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
    const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

namespace {

void require_valid_size(ImageSize size) {
    if (!size.valid()) {
        throw std::invalid_argument("image size must be at least 1x1, got " +
                                    std::to_string(size.width) + "x" + std::to_string(size.height));
    }
}

} // namespace

NormBox normalize(const PixelBox& box, ImageSize size, BoundsPolicy policy) {
    require_valid_size(size);
    if (box.w <= 0.0 || box.h <= 0.0) throw std::invalid_argument("box width/height must be positive");

    const double W = size.width;
    const double H = size.height;
    double l = box.left(), r = box.right(), t = box.top(), b = box.bottom();

    if (policy == BoundsPolicy::strict) {
        if (l < 0.0 || t < 0.0 || r > W || b > H) {
            throw std::out_of_range("box [" + std::to_string(l) + "," + std::to_string(r) + "]x[" +
                                    std::to_string(t) + "," + std::to_string(b) +
                                    "] exceeds image bounds " + std::to_string(size.width) + "x" +
                                    std::to_string(size.height));
        }
    } else {
        l = std::max(l, 0.0);
        t = std::max(t, 0.0);
        r = std::min(r, W);
        b = std::min(b, H);
        if (r <= l || b <= t) throw std::out_of_range("box lies entirely outside the image");
    }

    NormBox out;
    out.cx = (l + r) / 2.0 / W;
    out.cy = (t + b) / 2.0 / H;
    out.w = (r - l) / W;
    out.h = (b - t) / H;
    out.category_id = box.category_id;
    out.confidence = box.confidence;
    return out;
}

PixelBox denormalize(const NormBox& box, ImageSize size) {
    require_valid_size(size);
    PixelBox out;
    out.cx = box.cx * size.width;
    out.cy = box.cy * size.height;
    out.w = box.w * size.width;
    out.h = box.h * size.height;
    out.category_id = box.category_id;
    out.confidence = box.confidence.value_or(1.0);
    return out;
}

Circle box_to_circle(const PixelBox& box, RadiusMode mode) {
    if (box.w <= 0.0 || box.h <= 0.0) throw std::invalid_argument("box width/height must be positive");
    const double denom = mode == RadiusMode::mean_extent ? 2.0 : 4.0;
    return Circle{box.cx, box.cy, (box.w + box.h) / denom};
}

double aspect_ratio(ImageSize size) {
    require_valid_size(size);
    return static_cast<double>(size.height) / static_cast<double>(size.width);
}

} // namespace antcensus
