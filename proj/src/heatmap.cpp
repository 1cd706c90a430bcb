#include "antcensus/heatmap.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace antcensus {

HeatGrid make_grid(int grid_w, int grid_h, ImageSize source_frame) {
    if (grid_w < 1 || grid_h < 1) throw std::invalid_argument("grid resolution must be >= 1");
    HeatGrid grid;
    grid.grid_w = grid_w;
    grid.grid_h = grid_h;
    grid.source_frame = source_frame;
    grid.cells.assign(static_cast<std::size_t>(grid_w) * grid_h, 0.0);
    return grid;
}

double grid_distance(double x, double y, double x0, double y0) {
    return std::sqrt((x - x0) * (x - x0) + (y - y0) * (y - y0));
}

namespace {

// Per-detection kernel support, precomputed once so row-band workers do not
// redo the scaling per thread.
struct Support {
    double x0 = 0.0, y0 = 0.0; // center in grid coordinates
    double inv_2r2 = 0.0;      // 1 / (2 r^2)
    double dmax2 = 0.0;        // squared support radius
    int x_begin = 0, x_end = 0;
    int y_begin = 0, y_end = 0;
};

std::vector<Support> plan_supports(const HeatGrid& grid, std::span<const PixelBox> dets,
                                   ImageSize frame, const KernelMode& mode, RadiusMode radius_mode) {
    if (!frame.valid()) throw std::invalid_argument("image size must be at least 1x1");
    if (!(mode.truncation_epsilon > 0.0 && mode.truncation_epsilon < 1.0)) {
        throw std::invalid_argument("truncation_epsilon must be in (0, 1)");
    }
    const double sx = static_cast<double>(grid.grid_w) / frame.width;
    const double sy = static_cast<double>(grid.grid_h) / frame.height;
    const double sr = 0.5 * (sx + sy);
    const double log_inv_eps = std::log(1.0 / mode.truncation_epsilon);

    std::vector<Support> supports;
    supports.reserve(dets.size());
    for (const auto& det : dets) {
        const Circle circle = box_to_circle(det, radius_mode);
        Support s;
        s.x0 = circle.x0 * sx;
        s.y0 = circle.y0 * sy;
        const double r = circle.r * sr;
        s.inv_2r2 = 1.0 / (2.0 * r * r);
        const double dmax = mode.variant == KernelVariant::standard
                                ? r * std::sqrt(2.0 * log_inv_eps)
                                : 2.0 * r * r * log_inv_eps;
        s.dmax2 = dmax * dmax;
        s.x_begin = std::max(0, static_cast<int>(std::ceil(s.x0 - dmax)));
        s.x_end = std::min(grid.grid_w - 1, static_cast<int>(std::floor(s.x0 + dmax)));
        s.y_begin = std::max(0, static_cast<int>(std::ceil(s.y0 - dmax)));
        s.y_end = std::min(grid.grid_h - 1, static_cast<int>(std::floor(s.y0 + dmax)));
        supports.push_back(s);
    }
    return supports;
}

// Applies one detection to the rows [row_begin, row_end) of the grid.
// Kept branch-light: the standard variant never needs a sqrt.
void apply_rows(HeatGrid& grid, const Support& s, KernelVariant variant, int row_begin, int row_end) {
    const int y_lo = std::max(s.y_begin, row_begin);
    const int y_hi = std::min(s.y_end, row_end - 1);
    for (int y = y_lo; y <= y_hi; ++y) {
        const double dy = y - s.y0;
        const double dy2 = dy * dy;
        double* row = grid.cells.data() + static_cast<std::size_t>(y) * grid.grid_w;
        for (int x = s.x_begin; x <= s.x_end; ++x) {
            const double dx = x - s.x0;
            const double d2 = dx * dx + dy2;
            if (d2 > s.dmax2) continue;
            row[x] += variant == KernelVariant::standard ? std::exp(-d2 * s.inv_2r2)
                                                         : std::exp(-std::sqrt(d2) * s.inv_2r2);
        }
    }
}

} // namespace

void accumulate_serial(HeatGrid& grid, std::span<const PixelBox> dets, ImageSize frame,
                       const KernelMode& mode, RadiusMode radius_mode) {
    const auto supports = plan_supports(grid, dets, frame, mode, radius_mode);
    for (const auto& s : supports) apply_rows(grid, s, mode.variant, 0, grid.grid_h);
}

void accumulate(HeatGrid& grid, std::span<const PixelBox> dets, ImageSize frame,
                const KernelMode& mode, RadiusMode radius_mode) {
    const auto supports = plan_supports(grid, dets, frame, mode, radius_mode);
#if defined(_OPENMP)
    #pragma omp parallel
    {
        const int nt = omp_get_num_threads();
        const int t = omp_get_thread_num();
        const int row_begin = static_cast<int>(static_cast<long long>(grid.grid_h) * t / nt);
        const int row_end = static_cast<int>(static_cast<long long>(grid.grid_h) * (t + 1) / nt);
        for (const auto& s : supports) apply_rows(grid, s, mode.variant, row_begin, row_end);
    }
#else
    for (const auto& s : supports) apply_rows(grid, s, mode.variant, 0, grid.grid_h);
#endif
}

std::vector<double> scale_for_render(const HeatGrid& grid) {
    std::vector<double> scaled(grid.cells.size(), 0.0);
    if (grid.cells.empty()) return scaled;
    const auto [lo_it, hi_it] = std::minmax_element(grid.cells.begin(), grid.cells.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (hi > lo) {
        const double inv = 1.0 / (hi - lo);
        for (std::size_t i = 0; i < grid.cells.size(); ++i) scaled[i] = (grid.cells[i] - lo) * inv;
    }
    return scaled;
}

namespace {

// Anchors for the default ramp: black -> deep purple -> red -> orange ->
// yellow -> near-white, luminance strictly increasing. Linear interpolation
// between anchors keeps the luminance monotone (luminance is linear in RGB).
constexpr std::array<Rgb8, 8> kInfernoAnchors = {{
    {0, 0, 0},
    {40, 11, 84},
    {101, 21, 110},
    {159, 42, 99},
    {212, 72, 66},
    {245, 125, 21},
    {250, 193, 39},
    {252, 255, 164},
}};

std::array<Rgb8, 256> build_ramp(std::span<const Rgb8> anchors) {
    std::array<Rgb8, 256> table{};
    const std::size_t segments = anchors.size() - 1;
    for (int i = 0; i < 256; ++i) {
        const double pos = i / 255.0 * segments;
        const std::size_t seg = std::min(static_cast<std::size_t>(pos), segments - 1);
        const double f = pos - static_cast<double>(seg);
        auto lerp = [f](std::uint8_t a, std::uint8_t b) {
            return static_cast<std::uint8_t>(std::lround(a + (b - a) * f));
        };
        table[i] = {lerp(anchors[seg].r, anchors[seg + 1].r), lerp(anchors[seg].g, anchors[seg + 1].g),
                    lerp(anchors[seg].b, anchors[seg + 1].b)};
    }
    return table;
}

std::array<Rgb8, 256> build_gray() {
    std::array<Rgb8, 256> table{};
    for (int i = 0; i < 256; ++i) {
        table[i] = {static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(i),
                    static_cast<std::uint8_t>(i)};
    }
    return table;
}

} // namespace

const std::array<Rgb8, 256>& colormap_table(const std::string& name) {
    static const std::array<Rgb8, 256> inferno = build_ramp(kInfernoAnchors);
    static const std::array<Rgb8, 256> gray = build_gray();
    if (name == "inferno") return inferno;
    if (name == "gray") return gray;
    throw std::invalid_argument("unknown colormap '" + name + "' (known: inferno, gray)");
}

std::vector<Rgb8> render(std::span<const double> scaled, int w, int h, const std::string& colormap) {
    if (w < 1 || h < 1 || scaled.size() != static_cast<std::size_t>(w) * h) {
        throw std::invalid_argument("render: raster dimensions do not match the value count");
    }
    const auto& table = colormap_table(colormap);
    std::vector<Rgb8> pixels(scaled.size());
    for (std::size_t i = 0; i < scaled.size(); ++i) {
        const double v = std::clamp(scaled[i], 0.0, 1.0);
        pixels[i] = table[static_cast<std::size_t>(std::lround(v * 255.0))];
    }
    return pixels;
}

std::string write_grid_csv(const HeatGrid& grid) {
    std::string out;
    out.reserve(grid.cells.size() * 8);
    char buf[64];
    for (int y = 0; y < grid.grid_h; ++y) {
        for (int x = 0; x < grid.grid_w; ++x) {
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, grid.at(x, y));
            out.append(buf, ptr);
            out.push_back(x + 1 < grid.grid_w ? ',' : '\n');
        }
    }
    return out;
}

} // namespace antcensus
